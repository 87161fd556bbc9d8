#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "war/augment.hpp"
#include "war/embedding.hpp"
#include "war/eval.hpp"
#include "war/kg.hpp"
#include "war/miner.hpp"
#include "war/trainer.hpp"

namespace war {

/// Flat pipeline configuration. Every field has a `key` usable in config files
/// (`key = value`, `#` comments) and as a `--key` command-line override.
struct PipelineConfig {
  std::string train_path, valid_path, test_path;
  std::string entity_dict, relation_dict;
  bool add_inverse = false;
  std::string out_dir = ".";

  std::size_t l_max = 3;
  double threshold = 0.2;
  double sample_p = 1.0;
  double conf_threshold = 0.5;
  std::size_t max_rows = 200'000'000;

  AugmentMode mode = AugmentMode::Metapaths;
  RuleSampling rule_sampling = RuleSampling::Normalized;
  Strategy strategy = Strategy::None;
  Composition composition = Composition::Add;
  std::size_t basis_count = 0;
  bool basis_for_original = false;

  Scoring scoring = Scoring::TransE_L2;
  std::size_t dim = 200;
  std::optional<double> margin;  ///< default depends on scoring
  std::size_t negatives = 16;
  double lr = 0.1;
  double lr_rnn = 0.01;
  double lr_basis = 0.01;
  double regularization = 0.0;
  std::size_t epochs = 100;
  std::size_t patience = 2;
  std::size_t batch_nodes = 1024;
  std::size_t triplet_batch = 256;
  std::optional<std::size_t> original_edges;
  std::size_t valid_max = 0;

  Protocol protocol = Protocol::Filtered;
  TiePolicy tie = TiePolicy::Optimistic;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// Keys accepted by apply_setting, in documentation order.
const std::vector<std::string>& config_keys();

/// Sets one field from its textual value. Throws ConfigError on unknown keys or bad values.
void apply_setting(PipelineConfig& cfg, const std::string& key, const std::string& value);

/// Applies every `key = value` line of a config file.
void load_config_file(PipelineConfig& cfg, const std::string& path);

/// Checks cross-field constraints (ranges, strategy/scoring compatibility).
void validate(const PipelineConfig& cfg);

MinerOptions miner_options(const PipelineConfig& cfg);
TrainConfig train_config(const PipelineConfig& cfg);
LoadOptions load_options(const PipelineConfig& cfg);

AugmentMode parse_mode(const std::string& s);
Strategy parse_strategy(const std::string& s);
Scoring parse_scoring(const std::string& s);
const char* scoring_name(Scoring s);
const char* strategy_name(Strategy s);
const char* mode_name(AugmentMode m);

}  // namespace war
