#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "war/embedding.hpp"
#include "war/kg.hpp"

namespace war {

enum class Protocol { Raw, Filtered };
enum class TiePolicy { Optimistic, Pessimistic };

/// Known-true triplets indexed for head and tail corruption lookups.
class TripletFilter {
 public:
  TripletFilter() = default;
  explicit TripletFilter(const std::vector<const KnowledgeGraph*>& graphs);

  void add(const Triplet& t);
  /// Sorted distinct tails e with (h, r, e) known.
  const std::vector<EntityId>* tails(EntityId h, RelationId r) const;
  /// Sorted distinct heads e with (e, r, t) known.
  const std::vector<EntityId>* heads(RelationId r, EntityId t) const;
  void finalize();

 private:
  std::unordered_map<std::uint64_t, std::vector<EntityId>> tails_;
  std::unordered_map<std::uint64_t, std::vector<EntityId>> heads_;
};

struct TripletRanks {
  std::size_t head = 1;
  std::size_t tail = 1;
};

struct RankingOptions {
  Protocol protocol = Protocol::Filtered;
  TiePolicy ties = TiePolicy::Optimistic;
};

/// 1 + number of candidate corruptions outscoring the positive, over the full
/// entity set. The filter is consulted only under Protocol::Filtered.
TripletRanks rank_triplet(const Triplet& t, const EmbeddingState& state, Scoring scoring,
                          const TripletFilter* filter, const RankingOptions& options);

struct RankingResult {
  std::vector<std::size_t> ranks;  ///< head and tail ranks pooled
  double mr = 0.0;
  double mrr = 0.0;
  double hits1 = 0.0;
  double hits3 = 0.0;
  double hits10 = 0.0;
  Protocol protocol = Protocol::Filtered;
  std::size_t q = 0;
};

/// MR, MRR and Hits@{1,3,10}. Throws ConfigError on an empty rank list.
RankingResult compute_metrics(std::vector<std::size_t> ranks, Protocol protocol = Protocol::Filtered);

/// Ranks every triplet of `graph` (optionally the first max_triplets only) in both directions.
RankingResult evaluate(const KnowledgeGraph& graph, const EmbeddingState& state, Scoring scoring,
                       const TripletFilter* filter, const RankingOptions& options,
                       std::size_t max_triplets = 0, unsigned threads = 1);

std::string metrics_json(const RankingResult& r);
std::string metrics_table(const RankingResult& r);
const char* protocol_name(Protocol p);

}  // namespace war
