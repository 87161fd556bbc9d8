#include "war/trainer.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "war/errors.hpp"
#include "war/io.hpp"
#include "war/sharing.hpp"

namespace war {

Trainer::Trainer(const DatasetSplit& data, const InformativeMap& informative, const RuleMaps& rulemaps,
                 TrainConfig config)
    : data_(data),
      config_(std::move(config)),
      index_(informative, rulemaps, config_.mode, config_.rule_sampling),
      filter_({&data.train, &data.valid, &data.test}),
      rng_(derive_seed(config_.model.seed, 2)) {
  if (data.train.num_edges() == 0) throw DataError("training split is empty");
  if (config_.model.negatives == 0) throw ConfigError("negatives per positive must be >= 1");
  if (config_.model.margin < 0.0) throw ConfigError("margin must be >= 0");
  if (config_.batch_nodes == 0 || config_.triplet_batch == 0) throw ConfigError("batch sizes must be >= 1");
  if (config_.max_walk_nodes < 2) throw ConfigError("walk length must be >= 2");
  validate_sharing(config_.sharing.strategy, config_.model.scoring);
  state_ = EmbeddingState(data.train.num_entities(), data.train.num_relations(), config_.model.dim,
                          config_.sharing, derive_seed(config_.model.seed, 1));
  best_ = state_;
}

EpochLog Trainer::run_epoch() {
  const auto& graph = data_.train;
  const std::size_t num_entities = graph.num_entities();
  EpochLog entry;
  entry.epoch = epoch_ + 1;

  std::vector<EntityId> nodes(num_entities);
  std::iota(nodes.begin(), nodes.end(), EntityId{0});
  std::shuffle(nodes.begin(), nodes.end(), rng_);

  double loss_sum = 0.0;
  Gradients grads;
  for (std::size_t begin = 0, b = 0; begin < nodes.size(); begin += config_.batch_nodes, ++b) {
    const std::size_t end = std::min(nodes.size(), begin + config_.batch_nodes);
    const std::span<const EntityId> batch(nodes.data() + begin, end - begin);

    MinibatchOptions opts;
    opts.max_walk_nodes = config_.max_walk_nodes;
    opts.original_edges = config_.original_edges;
    opts.min_original_edges = (graph.num_edges() * batch.size() + num_entities - 1) / num_entities;
    auto triplets = build_minibatch(graph, batch, index_, state_.registry, opts,
                                    derive_seed(config_.model.seed, epoch_ + 1, b + 1), rng_);
    state_.sync_minted();
    std::shuffle(triplets.begin(), triplets.end(), rng_);

    for (const auto& t : triplets) {
      if (t.source != TripletSource::Original) ++entry.augmented;
      if (t.source == TripletSource::RuleMapped) ++entry.rule_mapped;
    }
    entry.triplets += triplets.size();

    for (std::size_t s = 0; s < triplets.size(); s += config_.triplet_batch) {
      const std::size_t e = std::min(triplets.size(), s + config_.triplet_batch);
      grads.clear();
      for (std::size_t i = s; i < e; ++i) {
        const auto negs =
            negative_sample(triplets[i].triplet(), num_entities, config_.model.negatives, rng_);
        loss_sum += loss_and_grad(triplets[i], negs, state_, config_.model, grads);
      }
      grads.scale(1.0 / static_cast<double>(e - s));
      apply_update(state_, grads, config_.model);
    }
  }
  entry.mean_loss = entry.triplets ? loss_sum / static_cast<double>(entry.triplets) : 0.0;
  entry.minted_relations = state_.registry.size();
  ++epoch_;

  if (data_.valid.num_edges() > 0) {
    const auto res = evaluate(data_.valid, state_, config_.model.scoring, &filter_,
                              config_.valid_ranking, config_.valid_max_triplets, config_.threads);
    entry.valid_mrr = res.mrr;
  }
  if (data_.valid.num_edges() == 0 || entry.valid_mrr > best_mrr_) {
    best_mrr_ = entry.valid_mrr;
    best_ = state_;
    bad_epochs_ = 0;
    entry.improved = true;
  } else if (++bad_epochs_ >= config_.patience) {
    stopped_ = true;
  }
  if (epoch_ >= config_.max_epochs) stopped_ = true;
  log_.push_back(entry);
  return entry;
}

std::vector<EpochLog> Trainer::fit() {
  while (!stopped_) run_epoch();
  return log_;
}

namespace {

constexpr char kCheckpointMagic[8] = {'W', 'A', 'R', 'C', 'K', 'P', 'T', '1'};

}  // namespace

void Trainer::save_checkpoint(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path);
  out.write(kCheckpointMagic, 8);
  binio::put_u64(out, static_cast<std::uint64_t>(config_.model.scoring));
  binio::put_u64(out, epoch_);
  binio::put_f64(out, best_mrr_);
  binio::put_u64(out, bad_epochs_);
  binio::put_u64(out, stopped_ ? 1 : 0);
  std::ostringstream rng;
  rng << rng_;
  binio::put_string(out, rng.str());
  write_state(out, best_);
  write_state(out, state_);
  binio::put_u64(out, log_.size());
  for (const auto& e : log_) {
    binio::put_u64(out, e.epoch);
    binio::put_f64(out, e.mean_loss);
    binio::put_u64(out, e.triplets);
    binio::put_u64(out, e.augmented);
    binio::put_u64(out, e.rule_mapped);
    binio::put_u64(out, e.minted_relations);
    binio::put_f64(out, e.valid_mrr);
    binio::put_u64(out, e.improved ? 1 : 0);
  }
  if (!out) throw DataError("failed while writing checkpoint " + path);
}

namespace {

struct CheckpointHeader {
  Scoring scoring;
  std::size_t epoch;
  double best_mrr;
  std::size_t bad_epochs;
  bool stopped;
  std::string rng;
};

CheckpointHeader read_header(std::istream& in, const std::string& path) {
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kCheckpointMagic, 8) != 0) {
    throw DataError(path + " is not a training checkpoint");
  }
  CheckpointHeader h;
  h.scoring = static_cast<Scoring>(binio::get_u64(in));
  h.epoch = binio::get_u64(in);
  h.best_mrr = binio::get_f64(in);
  h.bad_epochs = binio::get_u64(in);
  h.stopped = binio::get_u64(in) != 0;
  h.rng = binio::get_string(in);
  return h;
}

}  // namespace

void Trainer::load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path);
  const auto h = read_header(in, path);
  if (h.scoring != config_.model.scoring) throw ConfigError("checkpoint scoring function differs");
  EmbeddingState best = read_state(in);
  EmbeddingState cur = read_state(in);
  if (cur.num_entities() != data_.train.num_entities() ||
      cur.num_original_relations() != data_.train.num_relations() || cur.dim() != config_.model.dim) {
    throw DataError("checkpoint dimensions do not match the dataset or configuration");
  }
  std::vector<EpochLog> log(binio::get_u64(in));
  for (auto& e : log) {
    e.epoch = binio::get_u64(in);
    e.mean_loss = binio::get_f64(in);
    e.triplets = binio::get_u64(in);
    e.augmented = binio::get_u64(in);
    e.rule_mapped = binio::get_u64(in);
    e.minted_relations = binio::get_u64(in);
    e.valid_mrr = binio::get_f64(in);
    e.improved = binio::get_u64(in) != 0;
  }
  std::istringstream rng(h.rng);
  rng >> rng_;
  epoch_ = h.epoch;
  best_mrr_ = h.best_mrr;
  bad_epochs_ = h.bad_epochs;
  stopped_ = h.stopped;
  best_ = std::move(best);
  state_ = std::move(cur);
  log_ = std::move(log);
}

CheckpointSummary read_checkpoint_summary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path);
  const auto h = read_header(in, path);
  CheckpointSummary s;
  s.scoring = h.scoring;
  s.best = read_state(in);
  return s;
}

TrainResult train(const DatasetSplit& data, const InformativeMap& informative, const RuleMaps& rulemaps,
                  const TrainConfig& config) {
  Trainer trainer(data, informative, rulemaps, config);
  auto log = trainer.fit();
  return {trainer.best_state(), std::move(log)};
}

}  // namespace war
