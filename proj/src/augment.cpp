#include "war/augment.hpp"

#include <algorithm>
#include <numeric>

#include "war/text.hpp"

namespace war {

RandomWalk random_walk(const KnowledgeGraph& graph, EntityId start, std::size_t max_nodes, Rng& rng) {
  RandomWalk walk;
  walk.nodes.push_back(start);
  EntityId cur = start;
  while (walk.nodes.size() < max_nodes) {
    const auto out = graph.out_edges(cur);
    if (out.empty()) break;
    std::uniform_int_distribution<std::size_t> pick(0, out.size() - 1);
    const auto& e = out[pick(rng)];
    walk.relations.push_back(e.relation);
    walk.nodes.push_back(e.tail);
    cur = e.tail;
  }
  return walk;
}

NewRelationRegistry::NewRelationRegistry(const NewRelationRegistry& other) {
  std::lock_guard lock(other.mutex_);
  first_id_ = other.first_id_;
  ids_ = other.ids_;
  paths_ = other.paths_;
}

NewRelationRegistry& NewRelationRegistry::operator=(const NewRelationRegistry& other) {
  if (this == &other) return *this;
  std::scoped_lock lock(mutex_, other.mutex_);
  first_id_ = other.first_id_;
  ids_ = other.ids_;
  paths_ = other.paths_;
  return *this;
}

RelationId NewRelationRegistry::get_or_mint(const Metapath& m) {
  std::lock_guard lock(mutex_);
  auto it = ids_.find(m);
  if (it != ids_.end()) return it->second;
  const auto id = static_cast<RelationId>(first_id_ + paths_.size());
  ids_.emplace(m, id);
  paths_.push_back(m);
  return id;
}

std::optional<RelationId> NewRelationRegistry::find(const Metapath& m) const {
  std::lock_guard lock(mutex_);
  auto it = ids_.find(m);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

AugmentationIndex::AugmentationIndex(const InformativeMap& informative, const RuleMaps& rulemaps,
                                     AugmentMode mode, RuleSampling sampling)
    : mode_(mode), sampling_(sampling) {
  if (mode == AugmentMode::None) return;
  for (const auto& [m, info] : informative) {
    Entry e;
    e.z = info.z;
    if (auto it = rulemaps.find(m); it != rulemaps.end()) {
      double total = 0.0;
      for (const auto& [q, conf] : it->second.entries) {
        e.relations.push_back(q);
        e.confidences.push_back(conf);
        total += conf;
        e.cumulative.push_back(total);
      }
      if (sampling == RuleSampling::Normalized && total > 0.0) {
        for (double& c : e.cumulative) c /= total;
        e.cumulative.back() = 1.0;
      }
    }
    if (mode == AugmentMode::RulesOnly && e.relations.empty()) continue;
    entries_.emplace(m, std::move(e));
  }
}

const AugmentationIndex::Entry* AugmentationIndex::find(const Metapath& m) const {
  auto it = entries_.find(m);
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<AugmentedTriplet> walk_to_triplets(const RandomWalk& walk, const AugmentationIndex& index,
                                               NewRelationRegistry& registry, Rng& rng) {
  std::vector<AugmentedTriplet> out;
  if (index.empty()) return out;
  const std::size_t n = walk.nodes.size();
  for (std::size_t i = 0; i + 2 < n; ++i) {
    for (std::size_t j = i + 2; j < n; ++j) {
      const EntityId head = walk.nodes[i];
      const EntityId tail = walk.nodes[j];
      const Metapath m(std::span<const RelationId>(walk.relations.data() + i, j - i));
      const auto* entry = index.find(m);
      if (!entry) continue;
      if (!entry->relations.empty()) {
        // One draw per informative occurrence, self-pairs included.
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        const double u = u01(rng);
        auto it = std::upper_bound(entry->cumulative.begin(), entry->cumulative.end(), u);
        if (it == entry->cumulative.end()) continue;  // raw confidences summing below 1
        const auto k = static_cast<std::size_t>(it - entry->cumulative.begin());
        if (head == tail) continue;
        out.push_back({head, entry->relations[k], tail, entry->z * entry->confidences[k],
                       TripletSource::RuleMapped});
      } else {
        if (head == tail) continue;
        out.push_back({head, registry.get_or_mint(m), tail, entry->z, TripletSource::Minted});
      }
    }
  }
  return out;
}

std::vector<AugmentedTriplet> build_minibatch(const KnowledgeGraph& graph,
                                              std::span<const EntityId> node_batch,
                                              const AugmentationIndex& index,
                                              NewRelationRegistry& registry,
                                              const MinibatchOptions& options,
                                              std::uint64_t stream_seed, Rng& rng) {
  std::vector<AugmentedTriplet> out;
  if (!index.empty()) {
    for (std::size_t k = 0; k < node_batch.size(); ++k) {
      Rng walk_rng(derive_seed(stream_seed, node_batch[k], k));
      const auto walk = random_walk(graph, node_batch[k], options.max_walk_nodes, walk_rng);
      auto trips = walk_to_triplets(walk, index, registry, walk_rng);
      out.insert(out.end(), trips.begin(), trips.end());
    }
  }
  const std::size_t originals =
      options.original_edges.value_or(std::max(out.size(), options.min_original_edges));
  if (graph.num_edges() > 0) {
    std::uniform_int_distribution<std::size_t> pick(0, graph.num_edges() - 1);
    out.reserve(out.size() + originals);
    for (std::size_t i = 0; i < originals; ++i) {
      const auto& t = graph.edge(static_cast<EdgeId>(pick(rng)));
      out.push_back({t.head, t.relation, t.tail, 1.0, TripletSource::Original});
    }
  }
  return out;
}

std::vector<AugmentedTriplet> augmentation_pass(const KnowledgeGraph& graph,
                                                const AugmentationIndex& index,
                                                NewRelationRegistry& registry,
                                                std::size_t max_walk_nodes, std::uint64_t seed) {
  std::vector<EntityId> nodes(graph.num_entities());
  std::iota(nodes.begin(), nodes.end(), EntityId{0});
  MinibatchOptions opts;
  opts.max_walk_nodes = max_walk_nodes;
  opts.original_edges = 0;
  Rng rng(seed);
  return build_minibatch(graph, nodes, index, registry, opts, seed, rng);
}

void write_augmented_tsv(std::ostream& out, std::span<const AugmentedTriplet> triplets,
                         const Dictionary* entities, const Dictionary* relations,
                         const NewRelationRegistry& registry) {
  auto entity = [&](EntityId e) {
    return entities && e < entities->size() ? entities->name(e) : std::to_string(e);
  };
  auto relation = [&](RelationId r) {
    if (registry.is_minted(r)) return "[" + format_metapath(registry.metapath_of(r), relations) + "]";
    return relations && r < relations->size() ? relations->name(r) : std::to_string(r);
  };
  for (const auto& t : triplets) {
    out << entity(t.head) << '\t' << relation(t.relation) << '\t' << entity(t.tail) << '\t'
        << text::format_real(t.weight) << '\n';
  }
}

}  // namespace war
