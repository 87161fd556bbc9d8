#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <unordered_map>
#include <vector>

#include "war/kg.hpp"
#include "war/metapath.hpp"
#include "war/miner.hpp"
#include "war/rng.hpp"
#include "war/rules.hpp"

namespace war {

struct RandomWalk {
  std::vector<EntityId> nodes;
  std::vector<RelationId> relations;  ///< relations[i] joins nodes[i] -> nodes[i+1]
};

/// Uniform out-neighbour walk of up to max_nodes nodes; stops early at a sink.
RandomWalk random_walk(const KnowledgeGraph& graph, EntityId start, std::size_t max_nodes, Rng& rng);

enum class TripletSource { Original, RuleMapped, Minted };

struct AugmentedTriplet {
  EntityId head = 0;
  RelationId relation = 0;
  EntityId tail = 0;
  double weight = 1.0;
  TripletSource source = TripletSource::Original;

  Triplet triplet() const { return {head, relation, tail}; }
};

/// Metapath -> freshly minted relation id, ids allocated from `first_id` upwards.
/// get_or_mint is safe to call concurrently.
class NewRelationRegistry {
 public:
  explicit NewRelationRegistry(RelationId first_id = 0) : first_id_(first_id) {}
  NewRelationRegistry(const NewRelationRegistry& other);
  NewRelationRegistry& operator=(const NewRelationRegistry& other);

  RelationId get_or_mint(const Metapath& m);
  std::optional<RelationId> find(const Metapath& m) const;
  bool is_minted(RelationId r) const { return r >= first_id_ && r < first_id_ + paths_.size(); }
  const Metapath& metapath_of(RelationId r) const { return paths_.at(r - first_id_); }
  RelationId first_id() const { return first_id_; }
  std::size_t size() const { return paths_.size(); }
  /// Minted metapaths in id order.
  const std::vector<Metapath>& metapaths() const { return paths_; }

 private:
  RelationId first_id_;
  std::map<Metapath, RelationId> ids_;
  std::vector<Metapath> paths_;
  mutable std::mutex mutex_;
};

enum class AugmentMode { None, RulesOnly, Metapaths };
enum class RuleSampling { Normalized, Raw };

/// Lookup of informative metapaths with their rule distributions, built once per run.
class AugmentationIndex {
 public:
  struct Entry {
    double z = 0.0;
    std::vector<RelationId> relations;  ///< rulemap relations, ascending id
    std::vector<double> confidences;
    std::vector<double> cumulative;     ///< sampling CDF over `relations`
  };

  AugmentationIndex() = default;
  AugmentationIndex(const InformativeMap& informative, const RuleMaps& rulemaps, AugmentMode mode,
                    RuleSampling sampling = RuleSampling::Normalized);

  const Entry* find(const Metapath& m) const;
  bool empty() const { return entries_.empty(); }
  AugmentMode mode() const { return mode_; }
  RuleSampling sampling() const { return sampling_; }

 private:
  std::unordered_map<Metapath, Entry, MetapathHash> entries_;
  AugmentMode mode_ = AugmentMode::None;
  RuleSampling sampling_ = RuleSampling::Normalized;
};

/// Triplets for every node pair (i, j), j - i >= 2, of the walk whose connecting
/// metapath is informative. Rule-mapped pairs draw q per occurrence.
std::vector<AugmentedTriplet> walk_to_triplets(const RandomWalk& walk, const AugmentationIndex& index,
                                               NewRelationRegistry& registry, Rng& rng);

struct MinibatchOptions {
  std::size_t max_walk_nodes = 3;
  /// Exact count of original edges to mix in; default is max(walk-derived count, min_original_edges).
  std::optional<std::size_t> original_edges;
  std::size_t min_original_edges = 0;
};

/// Walk-derived triplets for each start node (in batch order, one rng stream per
/// node derived from stream_seed), followed by uniformly sampled original edges.
std::vector<AugmentedTriplet> build_minibatch(const KnowledgeGraph& graph,
                                              std::span<const EntityId> node_batch,
                                              const AugmentationIndex& index,
                                              NewRelationRegistry& registry,
                                              const MinibatchOptions& options,
                                              std::uint64_t stream_seed, Rng& rng);

/// Walk-derived triplets from one walk per node, nodes in id order.
std::vector<AugmentedTriplet> augmentation_pass(const KnowledgeGraph& graph,
                                                const AugmentationIndex& index,
                                                NewRelationRegistry& registry,
                                                std::size_t max_walk_nodes, std::uint64_t seed);

/// TSV `head<TAB>relation<TAB>tail<TAB>weight`; minted relations print as `[r1|r2]`.
void write_augmented_tsv(std::ostream& out, std::span<const AugmentedTriplet> triplets,
                         const Dictionary* entities, const Dictionary* relations,
                         const NewRelationRegistry& registry);

}  // namespace war
