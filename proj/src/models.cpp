#include "war/models.hpp"

#include <cmath>
#include <sstream>

#include "war/errors.hpp"
#include "war/sharing.hpp"

namespace war {

double default_margin(Scoring scoring) { return scoring == Scoring::DistMult ? 0.0 : 12.0; }

double score(std::span<const double> head, std::span<const double> relation,
             std::span<const double> tail, Scoring scoring) {
  if (head.size() != relation.size() || head.size() != tail.size()) {
    throw ConfigError("score: vector dimensions differ");
  }
  const std::size_t d = head.size();
  double acc = 0.0;
  switch (scoring) {
    case Scoring::TransE_L1:
      for (std::size_t i = 0; i < d; ++i) acc += std::abs(head[i] + relation[i] - tail[i]);
      return -acc;
    case Scoring::TransE_L2:
      for (std::size_t i = 0; i < d; ++i) {
        const double v = head[i] + relation[i] - tail[i];
        acc += v * v;
      }
      return -std::sqrt(acc);
    case Scoring::DistMult:
      for (std::size_t i = 0; i < d; ++i) acc += head[i] * relation[i] * tail[i];
      return acc;
  }
  return 0.0;
}

void score_backward(std::span<const double> head, std::span<const double> relation,
                    std::span<const double> tail, Scoring scoring, double scale,
                    std::span<double> d_head, std::span<double> d_relation, std::span<double> d_tail) {
  const std::size_t d = head.size();
  switch (scoring) {
    case Scoring::TransE_L1:
      for (std::size_t i = 0; i < d; ++i) {
        const double v = head[i] + relation[i] - tail[i];
        const double s = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
        d_head[i] -= scale * s;
        d_relation[i] -= scale * s;
        d_tail[i] += scale * s;
      }
      return;
    case Scoring::TransE_L2: {
      double norm = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        const double v = head[i] + relation[i] - tail[i];
        norm += v * v;
      }
      norm = std::sqrt(norm);
      if (norm == 0.0) return;
      for (std::size_t i = 0; i < d; ++i) {
        const double g = scale * (head[i] + relation[i] - tail[i]) / norm;
        d_head[i] -= g;
        d_relation[i] -= g;
        d_tail[i] += g;
      }
      return;
    }
    case Scoring::DistMult:
      for (std::size_t i = 0; i < d; ++i) {
        d_head[i] += scale * relation[i] * tail[i];
        d_relation[i] += scale * head[i] * tail[i];
        d_tail[i] += scale * head[i] * relation[i];
      }
      return;
  }
}

std::vector<Triplet> negative_sample(const Triplet& positive, std::size_t num_entities, std::size_t k,
                                     Rng& rng) {
  std::vector<Triplet> out;
  out.reserve(k);
  std::bernoulli_distribution coin(0.5);
  for (std::size_t i = 0; i < k; ++i) {
    Triplet t = positive;
    const bool corrupt_head = coin(rng);
    EntityId& slot = corrupt_head ? t.head : t.tail;
    if (num_entities > 1) {
      std::uniform_int_distribution<std::size_t> pick(0, num_entities - 2);
      auto e = static_cast<EntityId>(pick(rng));
      if (e >= slot) ++e;
      slot = e;
    }
    out.push_back(t);
  }
  return out;
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace {

[[noreturn]] void throw_non_finite(const AugmentedTriplet& t, double loss) {
  std::ostringstream msg;
  msg << "non-finite loss " << loss << " for triplet (" << t.head << ", " << t.relation << ", "
      << t.tail << ", weight " << t.weight << ")";
  throw NumericError(msg.str());
}

}  // namespace

double triplet_loss(const AugmentedTriplet& positive, std::span<const Triplet> negatives,
                    const EmbeddingState& state, const ModelConfig& config) {
  const auto r = relation_representation(positive.relation, state);
  double loss = softplus(-(config.margin + score(state.entities.row(positive.head), r,
                                                 state.entities.row(positive.tail), config.scoring)));
  if (!negatives.empty()) {
    double neg = 0.0;
    for (const auto& n : negatives) {
      neg += softplus(config.margin +
                      score(state.entities.row(n.head), r, state.entities.row(n.tail), config.scoring));
    }
    loss += neg / static_cast<double>(negatives.size());
  }
  return positive.weight * loss;
}

double loss_and_grad(const AugmentedTriplet& positive, std::span<const Triplet> negatives,
                     const EmbeddingState& state, const ModelConfig& config, Gradients& grads) {
  if (positive.weight == 0.0) return 0.0;
  const std::size_t dim = state.dim();
  const auto r = relation_representation(positive.relation, state);
  std::vector<double> d_rel(dim, 0.0);

  const auto h = state.entities.row(positive.head);
  const auto t = state.entities.row(positive.tail);
  const double s_pos = score(h, r, t, config.scoring);
  double loss = softplus(-(config.margin + s_pos));
  {
    const double ds = -positive.weight * sigmoid(-(config.margin + s_pos));
    auto& gh = Gradients::row(grads.entity, positive.head, dim);
    std::vector<double> gt(dim, 0.0);
    score_backward(h, r, t, config.scoring, ds, gh, d_rel, gt);
    auto& gt_row = Gradients::row(grads.entity, positive.tail, dim);
    for (std::size_t k = 0; k < dim; ++k) gt_row[k] += gt[k];
  }

  if (!negatives.empty()) {
    const double inv_k = 1.0 / static_cast<double>(negatives.size());
    double neg = 0.0;
    std::vector<double> gh(dim), gt(dim);
    for (const auto& n : negatives) {
      const auto nh = state.entities.row(n.head);
      const auto nt = state.entities.row(n.tail);
      const double s = score(nh, r, nt, config.scoring);
      neg += softplus(config.margin + s);
      std::fill(gh.begin(), gh.end(), 0.0);
      std::fill(gt.begin(), gt.end(), 0.0);
      score_backward(nh, r, nt, config.scoring, positive.weight * inv_k * sigmoid(config.margin + s),
                     gh, d_rel, gt);
      auto& gh_row = Gradients::row(grads.entity, n.head, dim);
      for (std::size_t k = 0; k < dim; ++k) gh_row[k] += gh[k];
      auto& gt_row = Gradients::row(grads.entity, n.tail, dim);
      for (std::size_t k = 0; k < dim; ++k) gt_row[k] += gt[k];
    }
    loss += neg * inv_k;
  }
  loss *= positive.weight;
  if (!std::isfinite(loss)) throw_non_finite(positive, loss);
  relation_backward(positive.relation, d_rel, state, grads);
  return loss;
}

void apply_update(EmbeddingState& state, const Gradients& grads, const ModelConfig& config) {
  const double lr = config.lr_embedding;
  const double reg = 2.0 * config.regularization;
  auto step_row = [&](std::span<double> row, const std::vector<double>& g, double rate) {
    for (std::size_t k = 0; k < row.size(); ++k) row[k] -= rate * (g[k] + reg * row[k]);
  };
  for (const auto& [id, g] : grads.entity) step_row(state.entities.row(id), g, lr);
  for (const auto& [id, g] : grads.relation) step_row(state.relations.row(id), g, lr);
  if (state.basis) {
    for (const auto& [id, g] : grads.coefficient) {
      step_row(state.basis->coefficients.row(id), g, config.lr_basis);
    }
    auto& v = state.basis->vectors.data();
    for (std::size_t i = 0; i < grads.basis.size(); ++i) v[i] -= config.lr_basis * grads.basis[i];
  }
  if (state.rnn) {
    auto& p = *state.rnn;
    for (std::size_t i = 0; i < grads.rnn_w_ih.size(); ++i) p.w_ih.data()[i] -= config.lr_rnn * grads.rnn_w_ih[i];
    for (std::size_t i = 0; i < grads.rnn_w_hh.size(); ++i) p.w_hh.data()[i] -= config.lr_rnn * grads.rnn_w_hh[i];
    for (std::size_t i = 0; i < grads.rnn_bias.size(); ++i) p.bias[i] -= config.lr_rnn * grads.rnn_bias[i];
  }
}

}  // namespace war
