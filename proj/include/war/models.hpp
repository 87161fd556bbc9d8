#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "war/augment.hpp"
#include "war/embedding.hpp"
#include "war/rng.hpp"

namespace war {

struct ModelConfig {
  Scoring scoring = Scoring::TransE_L2;
  std::size_t dim = 200;
  double margin = 12.0;
  std::size_t negatives = 16;
  double lr_embedding = 0.1;
  double lr_rnn = 0.01;
  double lr_basis = 0.01;
  double regularization = 0.0;  ///< L2 coefficient on touched rows
  std::uint64_t seed = 0;
};

/// Default margin per scoring family: 12 for TransE, 0 for DistMult.
double default_margin(Scoring scoring);

/// Plausibility score, higher is better. Throws ConfigError on dimension mismatch.
double score(std::span<const double> head, std::span<const double> relation,
             std::span<const double> tail, Scoring scoring);

/// Gradients of score() with respect to each argument, accumulated with factor `scale`.
void score_backward(std::span<const double> head, std::span<const double> relation,
                    std::span<const double> tail, Scoring scoring, double scale,
                    std::span<double> d_head, std::span<double> d_relation, std::span<double> d_tail);

/// k corruptions; each replaces head or tail (fair coin) by a different uniform entity.
std::vector<Triplet> negative_sample(const Triplet& positive, std::size_t num_entities, std::size_t k,
                                     Rng& rng);

double softplus(double x);
double sigmoid(double x);

/// weight * [softplus(-(margin + s_pos)) + mean_k softplus(margin + s_neg)].
/// Gradients are accumulated into `grads`. Throws NumericError on a non-finite loss.
double loss_and_grad(const AugmentedTriplet& positive, std::span<const Triplet> negatives,
                     const EmbeddingState& state, const ModelConfig& config, Gradients& grads);

/// Loss only, same definition as loss_and_grad.
double triplet_loss(const AugmentedTriplet& positive, std::span<const Triplet> negatives,
                    const EmbeddingState& state, const ModelConfig& config);

/// SGD step on touched rows (embedding rate) and dense parameters (rnn/basis rates).
void apply_update(EmbeddingState& state, const Gradients& grads, const ModelConfig& config);

}  // namespace war
