#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "war/kg.hpp"
#include "war/metapath.hpp"

namespace war {

/// Contiguous block of rows in a JoinTable sharing one metapath key.
struct JoinGroup {
  Metapath metapath;
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t rows() const { return end - begin; }
};

/// Materialized metapath instances. Each row is the sequence of edge ids of one
/// path; source, destination and relation key are read back from the graph.
/// Rows are grouped by metapath, groups sorted by metapath.
class JoinTable {
 public:
  JoinTable() = default;

  /// One row per edge, grouped by relation.
  static JoinTable single_hop(const KnowledgeGraph& graph);

  const KnowledgeGraph& graph() const { return *graph_; }
  std::size_t length() const { return length_; }
  std::size_t rows() const { return length_ == 0 ? 0 : edges_.size() / length_; }
  std::span<const EdgeId> row(std::size_t i) const {
    return {edges_.data() + i * length_, length_};
  }
  EntityId src(std::size_t i) const { return graph_->edge(edges_[i * length_]).head; }
  EntityId dst(std::size_t i) const { return graph_->edge(edges_[(i + 1) * length_ - 1]).tail; }
  const std::vector<JoinGroup>& groups() const { return groups_; }

  /// Drops the rows of every group whose flag is set.
  void erase_groups(const std::vector<bool>& drop);

  friend JoinTable extend_join(const JoinTable& current, const JoinTable& base,
                               std::size_t max_rows);

 private:
  const KnowledgeGraph* graph_ = nullptr;
  std::size_t length_ = 0;
  std::vector<EdgeId> edges_;
  std::vector<JoinGroup> groups_;
};

/// Rows of `current` joined with rows of `base` on current.dst == base.src.
/// Throws MiningError when the result would exceed max_rows.
JoinTable extend_join(const JoinTable& current, const JoinTable& base,
                      std::size_t max_rows = 200'000'000);

class MiningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AssociationStats {
  Metapath metapath;
  std::size_t hop = 0;
  std::size_t edges_total = 0;    ///< edges of the hop's type in the mined graph
  std::size_t edges_covered = 0;  ///< distinct such edges in >= 1 instance
  double corrected_covered = 0.0;
  double association = 0.0;
  bool fallback = false;
};

/// Association of hop `hop` of group's metapath. With p < 1 the mined graph is a
/// sample and full_type_count is the type count on the unsampled graph. Returns
/// nullopt when the hop's type has no edges.
std::optional<AssociationStats> compute_association(const JoinTable& table, const JoinGroup& group,
                                                    std::size_t hop, double p,
                                                    std::size_t full_type_count);

struct MetapathInfo {
  Metapath metapath;
  double z = 0.0;
  std::vector<AssociationStats> per_hop;
  std::size_t instance_count = 0;
};

using InformativeMap = std::map<Metapath, MetapathInfo>;

struct MinerOptions {
  std::size_t max_length = 3;
  double threshold = 0.2;
  double sample_probability = 1.0;
  std::uint64_t seed = 0;
  std::size_t max_rows = 200'000'000;
  unsigned threads = 1;
};

struct MiningStats {
  std::size_t fallbacks = 0;
  std::vector<std::size_t> rows_per_level;  ///< joined rows before pruning, from length 2
};

/// Metapaths of length 2..max_length whose information z >= threshold. Per-hop
/// products exit early below the threshold and the metapath's rows are dropped
/// before the next join, which prunes all of its extensions.
InformativeMap mine_informative_metapaths(const KnowledgeGraph& graph, const MinerOptions& options,
                                          MiningStats* stats = nullptr);

/// TSV `metapath<TAB>z<TAB>instance_count`, z descending then metapath text ascending.
void write_metapath_report(std::ostream& out, const InformativeMap& informative,
                           const Dictionary* relations);
InformativeMap read_metapath_report(const std::string& path, const Dictionary& relations);

}  // namespace war
