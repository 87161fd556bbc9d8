#include "war/miner.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <thread>

#include "war/correction.hpp"
#include "war/errors.hpp"
#include "war/text.hpp"

namespace war {

JoinTable JoinTable::single_hop(const KnowledgeGraph& graph) {
  JoinTable t;
  t.graph_ = &graph;
  t.length_ = 1;
  const auto& counts = graph.relation_counts();
  std::vector<std::size_t> offsets(counts.size() + 1, 0);
  for (std::size_t r = 0; r < counts.size(); ++r) offsets[r + 1] = offsets[r] + counts[r];
  t.edges_.resize(graph.num_edges());
  std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
  for (std::size_t e = 0; e < graph.num_edges(); ++e) {
    t.edges_[cursor[graph.edge(static_cast<EdgeId>(e)).relation]++] = static_cast<EdgeId>(e);
  }
  for (std::size_t r = 0; r < counts.size(); ++r) {
    if (counts[r] == 0) continue;
    t.groups_.push_back({Metapath{static_cast<RelationId>(r)}, offsets[r], offsets[r + 1]});
  }
  return t;
}

void JoinTable::erase_groups(const std::vector<bool>& drop) {
  std::vector<EdgeId> kept;
  std::vector<JoinGroup> groups;
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    if (drop[g]) continue;
    const auto& grp = groups_[g];
    const std::size_t begin = kept.size() / length_;
    kept.insert(kept.end(), edges_.begin() + grp.begin * length_, edges_.begin() + grp.end * length_);
    groups.push_back({grp.metapath, begin, begin + grp.rows()});
  }
  edges_ = std::move(kept);
  groups_ = std::move(groups);
}

JoinTable extend_join(const JoinTable& current, const JoinTable& base, std::size_t max_rows) {
  JoinTable out;
  out.graph_ = current.graph_;
  out.length_ = current.length_ + base.length_;
  if (current.rows() == 0 || base.rows() == 0) return out;

  const auto& graph = *current.graph_;
  const std::size_t num_base_groups = base.groups_.size();

  // Index base rows by source node; within a node rows stay in table order,
  // which is grouped by metapath.
  std::vector<std::size_t> node_offsets(graph.num_entities() + 1, 0);
  for (std::size_t i = 0; i < base.rows(); ++i) ++node_offsets[base.src(i) + 1];
  for (std::size_t n = 0; n < graph.num_entities(); ++n) node_offsets[n + 1] += node_offsets[n];
  std::vector<std::uint32_t> by_src(base.rows());
  std::vector<std::uint32_t> row_group(base.rows());
  {
    std::vector<std::size_t> cursor(node_offsets.begin(), node_offsets.end() - 1);
    for (std::size_t g = 0; g < num_base_groups; ++g) {
      for (std::size_t i = base.groups_[g].begin; i < base.groups_[g].end; ++i) {
        by_src[cursor[base.src(i)]++] = static_cast<std::uint32_t>(i);
        row_group[i] = static_cast<std::uint32_t>(g);
      }
    }
  }

  // Count pass for the row cap and the output layout.
  std::size_t total = 0;
  for (std::size_t i = 0; i < current.rows(); ++i) {
    const EntityId d = current.dst(i);
    total += node_offsets[d + 1] - node_offsets[d];
  }
  if (total > max_rows) {
    throw MiningError("join of length " + std::to_string(out.length_) + " would produce " +
                      std::to_string(total) + " rows, above the cap of " +
                      std::to_string(max_rows));
  }
  out.edges_.resize(total * out.length_);

  std::vector<std::size_t> counts(num_base_groups);
  std::vector<std::size_t> cursor(num_base_groups);
  std::size_t next_row = 0;
  for (const auto& cg : current.groups_) {
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = cg.begin; i < cg.end; ++i) {
      const EntityId d = current.dst(i);
      for (std::size_t k = node_offsets[d]; k < node_offsets[d + 1]; ++k) ++counts[row_group[by_src[k]]];
    }
    for (std::size_t g = 0; g < num_base_groups; ++g) {
      cursor[g] = next_row;
      if (counts[g] > 0) {
        Metapath key = cg.metapath;
        for (RelationId r : base.groups_[g].metapath.relations()) key = key.extended(r);
        out.groups_.push_back({std::move(key), next_row, next_row + counts[g]});
      }
      next_row += counts[g];
    }
    for (std::size_t i = cg.begin; i < cg.end; ++i) {
      const auto left = current.row(i);
      const EntityId d = current.dst(i);
      for (std::size_t k = node_offsets[d]; k < node_offsets[d + 1]; ++k) {
        const std::uint32_t br = by_src[k];
        EdgeId* dst = out.edges_.data() + cursor[row_group[br]]++ * out.length_;
        std::copy(left.begin(), left.end(), dst);
        const auto right = base.row(br);
        std::copy(right.begin(), right.end(), dst + left.size());
      }
    }
  }
  return out;
}

std::optional<AssociationStats> compute_association(const JoinTable& table, const JoinGroup& group,
                                                    std::size_t hop, double p,
                                                    std::size_t full_type_count) {
  const auto& graph = table.graph();
  const RelationId rel = group.metapath[hop];
  const std::size_t total = rel < graph.num_relations() ? graph.relation_counts()[rel] : 0;
  if (total == 0 || (p < 1.0 && full_type_count == 0)) return std::nullopt;

  std::vector<EdgeId> column;
  column.reserve(group.rows());
  for (std::size_t i = group.begin; i < group.end; ++i) column.push_back(table.row(i)[hop]);
  std::sort(column.begin(), column.end());
  const auto covered =
      static_cast<std::size_t>(std::unique(column.begin(), column.end()) - column.begin());

  AssociationStats s;
  s.metapath = group.metapath;
  s.hop = hop;
  s.edges_total = total;
  s.edges_covered = covered;
  if (p >= 1.0) {
    s.corrected_covered = static_cast<double>(covered);
    s.association = static_cast<double>(covered) / static_cast<double>(total);
    return s;
  }
  const double n_full = static_cast<double>(full_type_count);
  const auto solved = solve_correction(p, group.metapath.length(), n_full,
                                       static_cast<double>(group.rows()),
                                       static_cast<double>(total - covered),
                                       static_cast<double>(covered));
  s.corrected_covered = solved.covered;
  s.fallback = solved.fallback;
  s.association = std::clamp(solved.covered / n_full, 0.0, 1.0);
  return s;
}

namespace {

struct GroupOutcome {
  bool keep = false;
  MetapathInfo info;
};

GroupOutcome evaluate_group(const JoinTable& table, const JoinGroup& group,
                            const MinerOptions& options, const std::vector<std::size_t>& full_counts) {
  GroupOutcome out;
  out.info.metapath = group.metapath;
  out.info.instance_count = group.rows();
  double z = 1.0;
  for (std::size_t hop = 0; hop < group.metapath.length(); ++hop) {
    const RelationId rel = group.metapath[hop];
    auto stats = compute_association(table, group, hop, options.sample_probability,
                                     rel < full_counts.size() ? full_counts[rel] : 0);
    if (!stats) return out;
    z *= stats->association;
    out.info.per_hop.push_back(std::move(*stats));
    if (z < options.threshold) return out;
  }
  out.info.z = z;
  out.keep = true;
  return out;
}

}  // namespace

InformativeMap mine_informative_metapaths(const KnowledgeGraph& graph, const MinerOptions& options,
                                          MiningStats* stats) {
  if (options.max_length < 2) throw ConfigError("maximum metapath length must be at least 2");
  // Thresholds above 1 are accepted and simply select nothing.
  if (!(options.threshold > 0.0)) throw ConfigError("metapath-information threshold must be > 0");
  if (!(options.sample_probability > 0.0 && options.sample_probability <= 1.0)) {
    throw ConfigError("sampling probability must lie in (0, 1]");
  }

  const bool sampling = options.sample_probability < 1.0;
  const KnowledgeGraph sampled =
      sampling ? sample_edges(graph, options.sample_probability, options.seed) : KnowledgeGraph{};
  const KnowledgeGraph& mined = sampling ? sampled : graph;

  InformativeMap result;
  const JoinTable base = JoinTable::single_hop(mined);
  JoinTable working = base;
  for (std::size_t len = 2; len <= options.max_length; ++len) {
    working = extend_join(working, base, options.max_rows);
    if (stats) stats->rows_per_level.push_back(working.rows());
    const auto& groups = working.groups();
    std::vector<GroupOutcome> outcomes(groups.size());

    const unsigned workers = std::max(1u, std::min<unsigned>(options.threads, groups.size()));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (std::size_t g = next++; g < groups.size(); g = next++) {
        outcomes[g] = evaluate_group(working, groups[g], options, graph.relation_counts());
      }
    };
    if (workers <= 1) {
      work();
    } else {
      std::vector<std::thread> pool;
      for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
      for (auto& t : pool) t.join();
    }

    std::vector<bool> drop(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g) {
      auto& o = outcomes[g];
      if (stats) {
        for (const auto& h : o.info.per_hop) stats->fallbacks += h.fallback ? 1 : 0;
      }
      if (o.keep) {
        result.emplace(o.info.metapath, std::move(o.info));
      } else {
        drop[g] = true;
      }
    }
    if (len < options.max_length) working.erase_groups(drop);
  }
  return result;
}

void write_metapath_report(std::ostream& out, const InformativeMap& informative,
                           const Dictionary* relations) {
  std::vector<std::pair<std::string, const MetapathInfo*>> rows;
  rows.reserve(informative.size());
  for (const auto& [m, info] : informative) rows.emplace_back(format_metapath(m, relations), &info);
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    if (a.second->z != b.second->z) return a.second->z > b.second->z;
    return a.first < b.first;
  });
  for (const auto& [name, info] : rows) {
    out << name << '\t' << text::format_real(info->z) << '\t' << info->instance_count << '\n';
  }
}

InformativeMap read_metapath_report(const std::string& path, const Dictionary& relations) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open metapath report: " + path);
  InformativeMap out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cols = text::split(line, '\t');
    if (cols.size() != 3) throw ParseError(path, lineno, "expected metapath<TAB>z<TAB>count");
    MetapathInfo info;
    info.metapath = parse_metapath(std::string(cols[0]), relations);
    if (!text::parse_real(cols[1], info.z) || !text::parse_int(cols[2], info.instance_count)) {
      throw ParseError(path, lineno, "invalid number");
    }
    out.emplace(info.metapath, std::move(info));
  }
  return out;
}

}  // namespace war
