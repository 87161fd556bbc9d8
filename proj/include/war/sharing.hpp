#pragma once

#include <span>
#include <vector>

#include "war/embedding.hpp"
#include "war/metapath.hpp"

namespace war {

/// Rejects strategy/scoring pairs that cannot work (composition needs TransE).
void validate_sharing(Strategy strategy, Scoring scoring);

/// Representation of a metapath under the state's sharing strategy. Under
/// Strategy::None the metapath must already be minted.
std::vector<double> metapath_representation(const Metapath& metapath, const EmbeddingState& state);

/// Backpropagates dL/dr_m into every parameter the representation depends on.
void strategy_backward(const Metapath& metapath, std::span<const double> upstream,
                       const EmbeddingState& state, Gradients& grads);

/// Vector used for relation id r in scoring: a free row, or the shared
/// representation of its minted metapath.
std::vector<double> relation_representation(RelationId r, const EmbeddingState& state);
void relation_backward(RelationId r, std::span<const double> upstream, const EmbeddingState& state,
                       Gradients& grads);

}  // namespace war
