// Command-line driver: mine -> rules -> train -> eval.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "war/augment.hpp"
#include "war/config.hpp"
#include "war/errors.hpp"
#include "war/eval.hpp"
#include "war/io.hpp"
#include "war/miner.hpp"
#include "war/rules.hpp"
#include "war/text.hpp"
#include "war/trainer.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

std::string flag_name(const std::string& key) {
  std::string f = key;
  for (char& c : f) {
    if (c == '_') c = '-';
  }
  return "--" + f;
}

struct Paths {
  std::string metapaths;
  std::string rules;
  std::string checkpoint;
  std::string dump_augmented;
  std::string split = "test";
};

fs::path out_path(const war::PipelineConfig& cfg, const std::string& explicit_path, const char* name) {
  if (!explicit_path.empty()) return explicit_path;
  return fs::path(cfg.out_dir) / name;
}

war::DatasetSplit load(const war::PipelineConfig& cfg) {
  if (cfg.train_path.empty() || cfg.valid_path.empty() || cfg.test_path.empty()) {
    throw war::ConfigError("dataset paths missing: set train, valid and test");
  }
  return war::load_tsv_dataset(cfg.train_path, cfg.valid_path, cfg.test_path, war::load_options(cfg));
}

void write_text(const fs::path& path, const std::string& body) {
  std::ofstream out(path);
  if (!out) throw war::DataError("cannot write " + path.string());
  out << body;
}

int cmd_mine(const war::PipelineConfig& cfg, const Paths& paths) {
  const auto data = load(cfg);
  war::MiningStats stats;
  const auto informative = war::mine_informative_metapaths(data.train, war::miner_options(cfg), &stats);
  std::ostringstream report;
  war::write_metapath_report(report, informative, data.relations.get());
  const auto path = out_path(cfg, paths.metapaths, "metapaths.tsv");
  write_text(path, report.str());
  std::cerr << "mined " << informative.size() << " informative metapaths";
  if (stats.fallbacks) std::cerr << " (" << stats.fallbacks << " uncorrected hop estimates)";
  std::cerr << " -> " << path.string() << '\n';
  return 0;
}

int cmd_rules(const war::PipelineConfig& cfg, const Paths& paths) {
  const auto data = load(cfg);
  const auto mp_path = out_path(cfg, paths.metapaths, "metapaths.tsv");
  if (!fs::exists(mp_path)) throw war::DataError("metapath report not found: " + mp_path.string());
  const auto informative = war::read_metapath_report(mp_path.string(), *data.relations);
  const auto rulemaps = war::build_rulemaps(data.train, informative, cfg.conf_threshold, cfg.threads);
  std::ostringstream report;
  war::write_rules_report(report, rulemaps, data.relations.get());
  const auto path = out_path(cfg, paths.rules, "rules.tsv");
  write_text(path, report.str());
  std::size_t non_empty = 0;
  for (const auto& [m, rm] : rulemaps) non_empty += rm.empty() ? 0 : 1;
  std::cerr << non_empty << " of " << rulemaps.size() << " metapaths map to existing relations -> "
            << path.string() << '\n';
  return 0;
}

int cmd_train(const war::PipelineConfig& cfg, const Paths& paths) {
  const auto data = load(cfg);
  war::InformativeMap informative;
  war::RuleMaps rulemaps;
  if (cfg.mode != war::AugmentMode::None) {
    const auto mp_path = out_path(cfg, paths.metapaths, "metapaths.tsv");
    const auto rules_path = out_path(cfg, paths.rules, "rules.tsv");
    for (const auto& p : {mp_path, rules_path}) {
      if (!fs::exists(p)) throw war::DataError("report not found: " + p.string());
    }
    informative = war::read_metapath_report(mp_path.string(), *data.relations);
    rulemaps = war::read_rules_report(rules_path.string(), *data.relations, informative,
                                      cfg.conf_threshold);
  }
  const auto tc = war::train_config(cfg);

  if (!paths.dump_augmented.empty()) {
    war::AugmentationIndex index(informative, rulemaps, tc.mode, tc.rule_sampling);
    war::NewRelationRegistry registry(static_cast<war::RelationId>(data.relations->size()));
    const auto trips = war::augmentation_pass(data.train, index, registry, tc.max_walk_nodes, cfg.seed);
    std::ofstream out(paths.dump_augmented);
    if (!out) throw war::DataError("cannot write " + paths.dump_augmented);
    war::write_augmented_tsv(out, trips, data.entities.get(), data.relations.get(), registry);
  }

  war::Trainer trainer(data, informative, rulemaps, tc);
  const fs::path dir(cfg.out_dir);
  std::ofstream log(dir / "train_log.tsv");
  if (!log) throw war::DataError("cannot write " + (dir / "train_log.tsv").string());
  log << "epoch\tmean_loss\ttriplets\taugmented\trule_mapped\tminted\tvalid_mrr\timproved\n";
  while (!trainer.stopped()) {
    const auto e = trainer.run_epoch();
    log << e.epoch << '\t' << war::text::format_real(e.mean_loss) << '\t' << e.triplets << '\t'
        << e.augmented << '\t' << e.rule_mapped << '\t' << e.minted_relations << '\t'
        << war::text::format_real(e.valid_mrr) << '\t' << (e.improved ? 1 : 0) << '\n';
    std::cerr << "epoch " << e.epoch << "  loss " << e.mean_loss << "  valid MRR " << e.valid_mrr
              << (e.improved ? "  *" : "") << '\n';
  }

  trainer.save_checkpoint(out_path(cfg, paths.checkpoint, "checkpoint.bin").string());
  const auto& best = trainer.best_state();
  war::save_dictionary(*data.entities, (dir / "entities.dict").string());
  war::save_dictionary(*data.relations, (dir / "relations.dict").string());
  war::write_matrix_f32(best.entities, (dir / "entities.f32").string());
  const auto rel = war::relation_vectors(best);
  war::write_matrix_f32(rel, (dir / "relations.f32").string());
  war::write_matrix_tsv(best.entities, data.entities->names(), (dir / "entities.tsv").string());
  war::write_matrix_tsv(rel, war::relation_names(best, data.relations.get()),
                        (dir / "relations.tsv").string());
  std::cerr << "best valid MRR " << trainer.best_valid_mrr() << '\n';
  return 0;
}

int cmd_eval(const war::PipelineConfig& cfg, const Paths& paths) {
  const auto data = load(cfg);
  const auto summary = war::read_checkpoint_summary(out_path(cfg, paths.checkpoint, "checkpoint.bin").string());
  const auto& state = summary.best;
  if (state.num_entities() != data.entities->size() ||
      state.num_original_relations() != data.relations->size()) {
    throw war::DataError("checkpoint dictionary sizes do not match the dataset");
  }
  const war::KnowledgeGraph* split = nullptr;
  if (paths.split == "test") {
    split = &data.test;
  } else if (paths.split == "valid") {
    split = &data.valid;
  } else if (paths.split == "train") {
    split = &data.train;
  } else {
    throw war::ConfigError("unknown split '" + paths.split + "' (train|valid|test)");
  }
  if (split->num_edges() == 0) throw war::DataError("split '" + paths.split + "' is empty");
  const war::TripletFilter filter({&data.train, &data.valid, &data.test});
  war::RankingOptions opts{cfg.protocol, cfg.tie};
  const auto res = war::evaluate(*split, state, summary.scoring, &filter, opts, 0, cfg.threads);
  const auto json = war::metrics_json(res);
  std::cout << json << '\n' << war::metrics_table(res);
  write_text(fs::path(cfg.out_dir) / "metrics.json", json + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knowledge graph embedding with random-walk augmentation"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  app.add_option("--config", config_path, "key=value configuration file");
  std::map<std::string, std::string> overrides;
  for (const auto& key : war::config_keys()) {
    app.add_option_function<std::string>(
        flag_name(key), [&overrides, key](const std::string& v) { overrides[key] = v; },
        "override `" + key + "`");
  }

  Paths paths;
  auto* mine = app.add_subcommand("mine", "mine informative metapaths");
  mine->add_option("--metapaths", paths.metapaths, "metapath report path (default out-dir/metapaths.tsv)");

  auto* rules = app.add_subcommand("rules", "mine metapath -> relation rules");
  rules->add_option("--metapaths", paths.metapaths, "metapath report to read");
  rules->add_option("--rules", paths.rules, "rules report path (default out-dir/rules.tsv)");

  auto* train = app.add_subcommand("train", "train embeddings with walk augmentation");
  train->add_option("--metapaths", paths.metapaths, "metapath report to read");
  train->add_option("--rules", paths.rules, "rules report to read");
  train->add_option("--checkpoint", paths.checkpoint, "checkpoint path (default out-dir/checkpoint.bin)");
  train->add_option("--dump-augmented", paths.dump_augmented,
                    "write one walk pass of augmented triplets as TSV");

  auto* eval = app.add_subcommand("eval", "link-prediction metrics for a checkpoint");
  eval->add_option("--checkpoint", paths.checkpoint, "checkpoint path (default out-dir/checkpoint.bin)");
  eval->add_option("--split", paths.split, "train|valid|test")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    war::PipelineConfig cfg;
    if (!config_path.empty()) war::load_config_file(cfg, config_path);
    for (const auto& [k, v] : overrides) war::apply_setting(cfg, k, v);
    war::validate(cfg);
    fs::create_directories(cfg.out_dir);

    if (mine->parsed()) return cmd_mine(cfg, paths);
    if (rules->parsed()) return cmd_rules(cfg, paths);
    if (train->parsed()) return cmd_train(cfg, paths);
    if (eval->parsed()) return cmd_eval(cfg, paths);
  } catch (const war::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const war::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const war::MiningError& e) {
    std::cerr << "mining error: " << e.what() << '\n';
    return kExitData;
  } catch (const war::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
