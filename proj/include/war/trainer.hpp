#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "war/augment.hpp"
#include "war/embedding.hpp"
#include "war/eval.hpp"
#include "war/kg.hpp"
#include "war/miner.hpp"
#include "war/models.hpp"
#include "war/rules.hpp"

namespace war {

struct TrainConfig {
  ModelConfig model;
  SharingConfig sharing;
  AugmentMode mode = AugmentMode::Metapaths;
  RuleSampling rule_sampling = RuleSampling::Normalized;
  std::size_t max_walk_nodes = 3;
  std::size_t batch_nodes = 1024;
  std::size_t triplet_batch = 256;  ///< triplets per SGD step within a minibatch
  std::size_t max_epochs = 100;
  std::size_t patience = 2;         ///< epochs without validation MRR gain before stopping
  std::size_t valid_max_triplets = 0;  ///< 0 = whole validation split
  std::optional<std::size_t> original_edges;  ///< per minibatch; default balances walk triplets
  RankingOptions valid_ranking;
  unsigned threads = 1;
};

struct EpochLog {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  std::size_t triplets = 0;
  std::size_t augmented = 0;
  std::size_t rule_mapped = 0;
  std::size_t minted_relations = 0;
  double valid_mrr = 0.0;
  bool improved = false;
};

/// Minibatch training loop over walk-augmented triplets with early stopping on
/// validation MRR. Single update stream; bitwise reproducible for a seed.
class Trainer {
 public:
  Trainer(const DatasetSplit& data, const InformativeMap& informative, const RuleMaps& rulemaps,
          TrainConfig config);

  EpochLog run_epoch();
  /// Runs epochs until patience is exhausted or max_epochs is reached.
  std::vector<EpochLog> fit();
  bool stopped() const { return stopped_; }

  const EmbeddingState& state() const { return state_; }
  const EmbeddingState& best_state() const { return best_; }
  double best_valid_mrr() const { return best_mrr_; }
  std::size_t epoch() const { return epoch_; }
  const std::vector<EpochLog>& log() const { return log_; }
  const TrainConfig& config() const { return config_; }

  void save_checkpoint(const std::string& path) const;
  void load_checkpoint(const std::string& path);

 private:
  const DatasetSplit& data_;
  TrainConfig config_;
  AugmentationIndex index_;
  TripletFilter filter_;
  EmbeddingState state_;
  EmbeddingState best_;
  Rng rng_;
  std::size_t epoch_ = 0;
  double best_mrr_ = -1.0;
  std::size_t bad_epochs_ = 0;
  bool stopped_ = false;
  std::vector<EpochLog> log_;
};

struct TrainResult {
  EmbeddingState state;  ///< best validation state
  std::vector<EpochLog> log;
};

TrainResult train(const DatasetSplit& data, const InformativeMap& informative, const RuleMaps& rulemaps,
                  const TrainConfig& config);

/// Scoring function and best state stored in a trainer checkpoint.
struct CheckpointSummary {
  Scoring scoring = Scoring::TransE_L2;
  EmbeddingState best;
};
CheckpointSummary read_checkpoint_summary(const std::string& path);

}  // namespace war
