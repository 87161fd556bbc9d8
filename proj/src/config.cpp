#include "war/config.hpp"

#include <fstream>
#include <functional>

#include "war/errors.hpp"
#include "war/sharing.hpp"
#include "war/text.hpp"

namespace war {

AugmentMode parse_mode(const std::string& s) {
  if (s == "none") return AugmentMode::None;
  if (s == "rules-only" || s == "rules") return AugmentMode::RulesOnly;
  if (s == "metapaths") return AugmentMode::Metapaths;
  throw ConfigError("unknown augmentation mode '" + s + "' (none|rules-only|metapaths)");
}

Strategy parse_strategy(const std::string& s) {
  if (s == "none") return Strategy::None;
  if (s == "model") return Strategy::ModelCompose;
  if (s == "rnn") return Strategy::Rnn;
  if (s == "basis") return Strategy::Basis;
  throw ConfigError("unknown sharing strategy '" + s + "' (none|model|rnn|basis)");
}

Scoring parse_scoring(const std::string& s) {
  if (s == "transe" || s == "transe_l2") return Scoring::TransE_L2;
  if (s == "transe_l1") return Scoring::TransE_L1;
  if (s == "distmult") return Scoring::DistMult;
  throw ConfigError("unknown scoring function '" + s + "' (transe_l1|transe_l2|distmult)");
}

const char* scoring_name(Scoring s) {
  switch (s) {
    case Scoring::TransE_L1: return "transe_l1";
    case Scoring::TransE_L2: return "transe_l2";
    case Scoring::DistMult: return "distmult";
  }
  return "?";
}

const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::None: return "none";
    case Strategy::ModelCompose: return "model";
    case Strategy::Rnn: return "rnn";
    case Strategy::Basis: return "basis";
  }
  return "?";
}

const char* mode_name(AugmentMode m) {
  switch (m) {
    case AugmentMode::None: return "none";
    case AugmentMode::RulesOnly: return "rules-only";
    case AugmentMode::Metapaths: return "metapaths";
  }
  return "?";
}

namespace {

double to_real(const std::string& key, const std::string& v) {
  double out = 0.0;
  if (!text::parse_real(v, out)) throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
  return out;
}

template <typename Int>
Int to_int(const std::string& key, const std::string& v) {
  Int out{};
  if (!text::parse_int(v, out)) throw ConfigError("'" + key + "' expects an integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("'" + key + "' expects a boolean, got '" + v + "'");
}

using Setter = std::function<void(PipelineConfig&, const std::string&, const std::string&)>;

const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"train", [](auto& c, auto&, auto& v) { c.train_path = v; }},
      {"valid", [](auto& c, auto&, auto& v) { c.valid_path = v; }},
      {"test", [](auto& c, auto&, auto& v) { c.test_path = v; }},
      {"entity_dict", [](auto& c, auto&, auto& v) { c.entity_dict = v; }},
      {"relation_dict", [](auto& c, auto&, auto& v) { c.relation_dict = v; }},
      {"add_inverse", [](auto& c, auto& k, auto& v) { c.add_inverse = to_bool(k, v); }},
      {"out_dir", [](auto& c, auto&, auto& v) { c.out_dir = v; }},
      {"l_max", [](auto& c, auto& k, auto& v) { c.l_max = to_int<std::size_t>(k, v); }},
      {"threshold", [](auto& c, auto& k, auto& v) { c.threshold = to_real(k, v); }},
      {"sample_p", [](auto& c, auto& k, auto& v) { c.sample_p = to_real(k, v); }},
      {"conf_threshold", [](auto& c, auto& k, auto& v) { c.conf_threshold = to_real(k, v); }},
      {"max_rows", [](auto& c, auto& k, auto& v) { c.max_rows = to_int<std::size_t>(k, v); }},
      {"mode", [](auto& c, auto&, auto& v) { c.mode = parse_mode(v); }},
      {"rule_sampling",
       [](auto& c, auto& k, auto& v) {
         if (v == "normalized") {
           c.rule_sampling = RuleSampling::Normalized;
         } else if (v == "raw") {
           c.rule_sampling = RuleSampling::Raw;
         } else {
           throw ConfigError("'" + k + "' expects raw|normalized");
         }
       }},
      {"strategy", [](auto& c, auto&, auto& v) { c.strategy = parse_strategy(v); }},
      {"composition",
       [](auto& c, auto& k, auto& v) {
         if (v == "add") {
           c.composition = Composition::Add;
         } else if (v == "hadamard") {
           c.composition = Composition::Hadamard;
         } else {
           throw ConfigError("'" + k + "' expects add|hadamard");
         }
       }},
      {"basis_count", [](auto& c, auto& k, auto& v) { c.basis_count = to_int<std::size_t>(k, v); }},
      {"basis_for_original", [](auto& c, auto& k, auto& v) { c.basis_for_original = to_bool(k, v); }},
      {"scoring", [](auto& c, auto&, auto& v) { c.scoring = parse_scoring(v); }},
      {"dim", [](auto& c, auto& k, auto& v) { c.dim = to_int<std::size_t>(k, v); }},
      {"margin", [](auto& c, auto& k, auto& v) { c.margin = to_real(k, v); }},
      {"negatives", [](auto& c, auto& k, auto& v) { c.negatives = to_int<std::size_t>(k, v); }},
      {"lr", [](auto& c, auto& k, auto& v) { c.lr = to_real(k, v); }},
      {"lr_rnn", [](auto& c, auto& k, auto& v) { c.lr_rnn = to_real(k, v); }},
      {"lr_basis", [](auto& c, auto& k, auto& v) { c.lr_basis = to_real(k, v); }},
      {"regularization", [](auto& c, auto& k, auto& v) { c.regularization = to_real(k, v); }},
      {"epochs", [](auto& c, auto& k, auto& v) { c.epochs = to_int<std::size_t>(k, v); }},
      {"patience", [](auto& c, auto& k, auto& v) { c.patience = to_int<std::size_t>(k, v); }},
      {"batch_nodes", [](auto& c, auto& k, auto& v) { c.batch_nodes = to_int<std::size_t>(k, v); }},
      {"triplet_batch", [](auto& c, auto& k, auto& v) { c.triplet_batch = to_int<std::size_t>(k, v); }},
      {"original_edges",
       [](auto& c, auto& k, auto& v) { c.original_edges = to_int<std::size_t>(k, v); }},
      {"valid_max", [](auto& c, auto& k, auto& v) { c.valid_max = to_int<std::size_t>(k, v); }},
      {"protocol",
       [](auto& c, auto& k, auto& v) {
         if (v == "filtered") {
           c.protocol = Protocol::Filtered;
         } else if (v == "raw") {
           c.protocol = Protocol::Raw;
         } else {
           throw ConfigError("'" + k + "' expects raw|filtered");
         }
       }},
      {"tie",
       [](auto& c, auto& k, auto& v) {
         if (v == "optimistic") {
           c.tie = TiePolicy::Optimistic;
         } else if (v == "pessimistic") {
           c.tie = TiePolicy::Pessimistic;
         } else {
           throw ConfigError("'" + k + "' expects optimistic|pessimistic");
         }
       }},
      {"seed", [](auto& c, auto& k, auto& v) { c.seed = to_int<std::uint64_t>(k, v); }},
      {"threads", [](auto& c, auto& k, auto& v) { c.threads = to_int<unsigned>(k, v); }},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, fn] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

void apply_setting(PipelineConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& [name, fn] : setters()) {
    if (name == key) {
      fn(cfg, key, value);
      return;
    }
  }
  throw ConfigError("unknown configuration key '" + key + "'");
}

void load_config_file(PipelineConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto body = text::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key(text::trim(body.substr(0, eq)));
    const std::string value(text::trim(body.substr(eq + 1)));
    try {
      apply_setting(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void validate(const PipelineConfig& cfg) {
  if (cfg.l_max < 2) throw ConfigError("l_max must be >= 2");
  if (!(cfg.threshold > 0.0)) throw ConfigError("threshold must be > 0");
  if (!(cfg.sample_p > 0.0 && cfg.sample_p <= 1.0)) throw ConfigError("sample_p must lie in (0, 1]");
  if (!(cfg.conf_threshold > 0.0)) throw ConfigError("conf_threshold must be > 0");
  if (cfg.dim == 0) throw ConfigError("dim must be >= 1");
  if (cfg.negatives == 0) throw ConfigError("negatives must be >= 1");
  if (cfg.margin && *cfg.margin < 0.0) throw ConfigError("margin must be >= 0");
  validate_sharing(cfg.strategy, cfg.scoring);
}

MinerOptions miner_options(const PipelineConfig& cfg) {
  MinerOptions o;
  o.max_length = cfg.l_max;
  o.threshold = cfg.threshold;
  o.sample_probability = cfg.sample_p;
  o.seed = cfg.seed;
  o.max_rows = cfg.max_rows;
  o.threads = cfg.threads;
  return o;
}

TrainConfig train_config(const PipelineConfig& cfg) {
  TrainConfig t;
  t.model.scoring = cfg.scoring;
  t.model.dim = cfg.dim;
  t.model.margin = cfg.margin.value_or(default_margin(cfg.scoring));
  t.model.negatives = cfg.negatives;
  t.model.lr_embedding = cfg.lr;
  t.model.lr_rnn = cfg.lr_rnn;
  t.model.lr_basis = cfg.lr_basis;
  t.model.regularization = cfg.regularization;
  t.model.seed = cfg.seed;
  t.sharing.strategy = cfg.strategy;
  t.sharing.composition = cfg.composition;
  t.sharing.basis_count = cfg.basis_count;
  t.sharing.basis_for_original = cfg.basis_for_original;
  t.mode = cfg.mode;
  t.rule_sampling = cfg.rule_sampling;
  t.max_walk_nodes = cfg.l_max;
  t.batch_nodes = cfg.batch_nodes;
  t.triplet_batch = cfg.triplet_batch;
  t.max_epochs = cfg.epochs;
  t.patience = cfg.patience;
  t.valid_max_triplets = cfg.valid_max;
  t.original_edges = cfg.original_edges;
  t.valid_ranking.protocol = cfg.protocol;
  t.valid_ranking.ties = cfg.tie;
  t.threads = cfg.threads;
  return t;
}

LoadOptions load_options(const PipelineConfig& cfg) {
  LoadOptions o;
  if (!cfg.entity_dict.empty()) o.entity_dict_path = cfg.entity_dict;
  if (!cfg.relation_dict.empty()) o.relation_dict_path = cfg.relation_dict;
  o.add_inverse = cfg.add_inverse;
  return o;
}

}  // namespace war
