#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "war/kg.hpp"
#include "war/metapath.hpp"
#include "war/miner.hpp"

namespace war {

using NodePair = std::pair<EntityId, EntityId>;

/// Distinct (head, tail) pairs joined by at least one instance of the metapath, sorted.
std::vector<NodePair> metapath_pairs(const KnowledgeGraph& graph, const Metapath& metapath);

/// Fraction of metapath-connected distinct pairs that are also joined by q.
/// nullopt when no pair is connected by the metapath.
std::optional<double> compute_rule_confidence(const KnowledgeGraph& graph, const Metapath& metapath,
                                              RelationId q);

struct RuleMap {
  Metapath metapath;
  std::map<RelationId, double> entries;  ///< relation -> confidence
  double threshold = 0.5;

  bool empty() const { return entries.empty(); }
};

using RuleMaps = std::map<Metapath, RuleMap>;

/// Rulemap per informative metapath; empty when no relation reaches the threshold.
RuleMaps build_rulemaps(const KnowledgeGraph& graph, const InformativeMap& informative,
                        double conf_threshold, unsigned threads = 1);

/// TSV `metapath<TAB>relation<TAB>confidence`.
void write_rules_report(std::ostream& out, const RuleMaps& rulemaps, const Dictionary* relations);

/// Lines grouped into rulemaps; metapaths of `informative` without lines get empty maps.
RuleMaps read_rules_report(const std::string& path, const Dictionary& relations,
                           const InformativeMap& informative, double conf_threshold);

}  // namespace war
