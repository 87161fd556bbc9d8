#include "war/rules.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <thread>

#include "war/errors.hpp"
#include "war/text.hpp"

namespace war {

std::vector<NodePair> metapath_pairs(const KnowledgeGraph& graph, const Metapath& metapath) {
  std::vector<NodePair> pairs;
  if (metapath.empty()) return pairs;
  std::vector<EntityId> frontier, next;
  for (std::size_t h = 0; h < graph.num_entities(); ++h) {
    frontier.clear();
    for (const auto& e : graph.out_edges(static_cast<EntityId>(h))) {
      if (e.relation == metapath[0]) frontier.push_back(e.tail);
    }
    for (std::size_t hop = 1; hop < metapath.length() && !frontier.empty(); ++hop) {
      std::sort(frontier.begin(), frontier.end());
      frontier.erase(std::unique(frontier.begin(), frontier.end()), frontier.end());
      next.clear();
      for (EntityId n : frontier) {
        for (const auto& e : graph.out_edges(n)) {
          if (e.relation == metapath[hop]) next.push_back(e.tail);
        }
      }
      std::swap(frontier, next);
    }
    std::sort(frontier.begin(), frontier.end());
    frontier.erase(std::unique(frontier.begin(), frontier.end()), frontier.end());
    for (EntityId t : frontier) pairs.emplace_back(static_cast<EntityId>(h), t);
  }
  return pairs;
}

namespace {

std::uint64_t pair_key(EntityId h, EntityId t) { return (std::uint64_t{h} << 32) | t; }

/// Sorted distinct (pair, relation) entries of the graph.
class PairIndex {
 public:
  explicit PairIndex(const KnowledgeGraph& graph) {
    entries_.reserve(graph.num_edges());
    for (const auto& t : graph.triplets()) entries_.emplace_back(pair_key(t.head, t.tail), t.relation);
    std::sort(entries_.begin(), entries_.end());
    entries_.erase(std::unique(entries_.begin(), entries_.end()), entries_.end());
  }

  template <typename Fn>
  void for_each_relation(const NodePair& p, Fn&& fn) const {
    const std::uint64_t key = pair_key(p.first, p.second);
    auto it = std::lower_bound(entries_.begin(), entries_.end(), std::make_pair(key, RelationId{0}));
    for (; it != entries_.end() && it->first == key; ++it) fn(it->second);
  }

 private:
  std::vector<std::pair<std::uint64_t, RelationId>> entries_;
};

std::map<RelationId, std::size_t> overlap_counts(const PairIndex& index,
                                                 const std::vector<NodePair>& pairs) {
  std::map<RelationId, std::size_t> counts;
  for (const auto& p : pairs) index.for_each_relation(p, [&](RelationId r) { ++counts[r]; });
  return counts;
}

}  // namespace

std::optional<double> compute_rule_confidence(const KnowledgeGraph& graph, const Metapath& metapath,
                                              RelationId q) {
  const auto pairs = metapath_pairs(graph, metapath);
  if (pairs.empty()) return std::nullopt;
  std::vector<std::uint64_t> q_pairs;
  for (const auto& t : graph.triplets()) {
    if (t.relation == q) q_pairs.push_back(pair_key(t.head, t.tail));
  }
  std::sort(q_pairs.begin(), q_pairs.end());
  std::size_t hits = 0;
  for (const auto& p : pairs) {
    hits += std::binary_search(q_pairs.begin(), q_pairs.end(), pair_key(p.first, p.second)) ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

RuleMaps build_rulemaps(const KnowledgeGraph& graph, const InformativeMap& informative,
                        double conf_threshold, unsigned threads) {
  if (!(conf_threshold > 0.0)) throw ConfigError("rule-confidence threshold must be > 0");
  const PairIndex index(graph);
  std::vector<const Metapath*> keys;
  for (const auto& [m, info] : informative) keys.push_back(&m);
  std::vector<RuleMap> maps(keys.size());

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < keys.size(); i = next++) {
      RuleMap rm;
      rm.metapath = *keys[i];
      rm.threshold = conf_threshold;
      const auto pairs = metapath_pairs(graph, *keys[i]);
      if (!pairs.empty()) {
        const double denom = static_cast<double>(pairs.size());
        for (const auto& [q, hits] : overlap_counts(index, pairs)) {
          const double conf = static_cast<double>(hits) / denom;
          if (conf >= conf_threshold) rm.entries.emplace(q, conf);
        }
      }
      maps[i] = std::move(rm);
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, keys.size()));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  RuleMaps out;
  for (auto& rm : maps) out.emplace(rm.metapath, std::move(rm));
  return out;
}

void write_rules_report(std::ostream& out, const RuleMaps& rulemaps, const Dictionary* relations) {
  struct Line {
    std::string metapath, relation;
    double conf;
  };
  std::vector<Line> lines;
  for (const auto& [m, rm] : rulemaps) {
    const std::string mp = format_metapath(m, relations);
    for (const auto& [q, conf] : rm.entries) {
      lines.push_back({mp, format_metapath(Metapath{q}, relations), conf});
    }
  }
  std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
    if (a.metapath != b.metapath) return a.metapath < b.metapath;
    if (a.conf != b.conf) return a.conf > b.conf;
    return a.relation < b.relation;
  });
  for (const auto& l : lines) {
    out << l.metapath << '\t' << l.relation << '\t' << text::format_real(l.conf) << '\n';
  }
}

RuleMaps read_rules_report(const std::string& path, const Dictionary& relations,
                           const InformativeMap& informative, double conf_threshold) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open rules report: " + path);
  RuleMaps out;
  for (const auto& [m, info] : informative) out[m] = RuleMap{m, {}, conf_threshold};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cols = text::split(line, '\t');
    if (cols.size() != 3) throw ParseError(path, lineno, "expected metapath<TAB>relation<TAB>confidence");
    const Metapath m = parse_metapath(std::string(cols[0]), relations);
    const auto q = relations.find(cols[1]);
    if (!q) throw LookupError(path + ":" + std::to_string(lineno) + ": unknown relation");
    double conf = 0.0;
    if (!text::parse_real(cols[2], conf)) throw ParseError(path, lineno, "invalid confidence");
    auto& rm = out[m];
    rm.metapath = m;
    rm.threshold = conf_threshold;
    rm.entries[*q] = conf;
  }
  return out;
}

}  // namespace war
