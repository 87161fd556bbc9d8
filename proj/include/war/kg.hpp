#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace war {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;
using EdgeId = std::uint32_t;

struct Triplet {
  EntityId head = 0;
  RelationId relation = 0;
  EntityId tail = 0;

  friend bool operator==(const Triplet&, const Triplet&) = default;
  friend auto operator<=>(const Triplet&, const Triplet&) = default;
};

struct TripletHash {
  std::size_t operator()(const Triplet& t) const noexcept {
    std::uint64_t k = (std::uint64_t{t.head} << 32) ^ (std::uint64_t{t.relation} << 16) ^ t.tail;
    k ^= k >> 33;
    k *= 0xff51afd7ed558ccdULL;
    k ^= k >> 33;
    return static_cast<std::size_t>(k);
  }
};

/// Bijective name <-> dense id map. Ids follow first-seen insertion order.
class Dictionary {
 public:
  std::uint32_t get_or_add(std::string_view name);
  std::optional<std::uint32_t> find(std::string_view name) const;
  const std::string& name(std::uint32_t id) const { return names_.at(id); }
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

/// Out-edge of a node in CSR form. `edge` indexes KnowledgeGraph::triplets().
struct OutEdge {
  RelationId relation;
  EntityId tail;
  EdgeId edge;
};

/// Immutable triple store with CSR out-adjacency. Duplicate triplets are kept.
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;

  std::size_t num_entities() const { return num_entities_; }
  std::size_t num_relations() const { return num_relations_; }
  std::size_t num_edges() const { return triplets_.size(); }

  const std::vector<Triplet>& triplets() const { return triplets_; }
  const Triplet& edge(EdgeId e) const { return triplets_[e]; }

  std::span<const OutEdge> out_edges(EntityId node) const {
    return {adjacency_.data() + offsets_[node], adjacency_.data() + offsets_[node + 1]};
  }
  std::size_t out_degree(EntityId node) const { return offsets_[node + 1] - offsets_[node]; }
  const std::vector<std::size_t>& offsets() const { return offsets_; }

  /// Edge count per relation id.
  const std::vector<std::size_t>& relation_counts() const { return relation_counts_; }

  const std::shared_ptr<const Dictionary>& entity_dict() const { return entity_dict_; }
  const std::shared_ptr<const Dictionary>& relation_dict() const { return relation_dict_; }

  /// Optional node typing; empty unless supplied.
  const std::vector<std::uint32_t>& node_types() const { return node_types_; }

  friend KnowledgeGraph build_adjacency(std::vector<Triplet> triplets, std::size_t num_entities,
                                        std::size_t num_relations,
                                        std::shared_ptr<const Dictionary> entity_dict,
                                        std::shared_ptr<const Dictionary> relation_dict,
                                        std::vector<std::uint32_t> node_types);

 private:
  std::size_t num_entities_ = 0;
  std::size_t num_relations_ = 0;
  std::vector<Triplet> triplets_;
  std::vector<std::size_t> offsets_{0};
  std::vector<OutEdge> adjacency_;
  std::vector<std::size_t> relation_counts_;
  std::shared_ptr<const Dictionary> entity_dict_;
  std::shared_ptr<const Dictionary> relation_dict_;
  std::vector<std::uint32_t> node_types_;
};

/// Builds the CSR index. Throws DataError when any id is out of range.
/// When num_relations is 0 it is inferred as 1 + max relation id.
KnowledgeGraph build_adjacency(std::vector<Triplet> triplets, std::size_t num_entities,
                               std::size_t num_relations = 0,
                               std::shared_ptr<const Dictionary> entity_dict = nullptr,
                               std::shared_ptr<const Dictionary> relation_dict = nullptr,
                               std::vector<std::uint32_t> node_types = {});

/// Keeps each triplet independently with probability p. Throws ConfigError unless 0 < p <= 1.
KnowledgeGraph sample_edges(const KnowledgeGraph& graph, double p, std::uint64_t seed);

struct DatasetSplit {
  KnowledgeGraph train;
  KnowledgeGraph valid;
  KnowledgeGraph test;
  std::shared_ptr<const Dictionary> entities;
  std::shared_ptr<const Dictionary> relations;
  /// Relations below this id come from the input files; inverse relations (if any) follow.
  std::size_t num_base_relations = 0;
};

struct LoadOptions {
  std::optional<std::string> entity_dict_path;
  std::optional<std::string> relation_dict_path;
  /// Materialize a distinct inverse relation `<name>_inv` per relation in the training split.
  bool add_inverse = false;
};

/// Loads `head<TAB>relation<TAB>tail` files into splits sharing one dictionary set.
DatasetSplit load_tsv_dataset(const std::string& train_path, const std::string& valid_path,
                              const std::string& test_path, const LoadOptions& options = {});

/// Reads an `id<TAB>name` dictionary file. Ids must be 0..n-1 in any order.
Dictionary load_dictionary(const std::string& path);
void save_dictionary(const Dictionary& dict, const std::string& path);

}  // namespace war
