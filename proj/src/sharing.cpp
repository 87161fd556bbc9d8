#include "war/sharing.hpp"

#include <cmath>

#include "war/errors.hpp"

namespace war {

void validate_sharing(Strategy strategy, Scoring scoring) {
  if (strategy == Strategy::ModelCompose && scoring == Scoring::DistMult) {
    throw ConfigError("model composition sharing cannot be used with DistMult");
  }
}

namespace {

std::vector<double> basis_combination(const BasisParams& basis, std::size_t coeff_row) {
  const auto coeff = basis.coefficients.row(coeff_row);
  std::vector<double> out(basis.vectors.cols(), 0.0);
  for (std::size_t b = 0; b < coeff.size(); ++b) {
    const auto v = basis.vectors.row(b);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += coeff[b] * v[k];
  }
  return out;
}

void basis_backward(const BasisParams& basis, std::size_t coeff_row, std::span<const double> upstream,
                    Gradients& grads) {
  const std::size_t count = basis.vectors.rows();
  const std::size_t dim = basis.vectors.cols();
  const auto coeff = basis.coefficients.row(coeff_row);
  auto& g_coeff = Gradients::row(grads.coefficient, coeff_row, count);
  auto& g_vec = Gradients::dense(grads.basis, count * dim);
  for (std::size_t b = 0; b < count; ++b) {
    const auto v = basis.vectors.row(b);
    double dot = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      dot += v[k] * upstream[k];
      g_vec[b * dim + k] += coeff[b] * upstream[k];
    }
    g_coeff[b] += dot;
  }
}

std::size_t coefficient_row(const EmbeddingState& state, RelationId r) {
  const auto& basis = *state.basis;
  if (r < basis.coeff_base || r - basis.coeff_base >= basis.coefficients.rows()) {
    throw ConfigError("relation " + std::to_string(r) + " has no basis coefficients");
  }
  return r - basis.coeff_base;
}

RelationId minted_id(const Metapath& m, const EmbeddingState& state) {
  auto id = state.registry.find(m);
  if (!id) throw ConfigError("metapath is not registered as a relation");
  return *id;
}

/// Hidden states h_0..h_L of the recurrence over the constituent relation rows.
std::vector<std::vector<double>> rnn_forward(const Metapath& m, const EmbeddingState& state) {
  const auto& p = *state.rnn;
  const std::size_t dim = state.dim();
  std::vector<std::vector<double>> hs(m.length() + 1, std::vector<double>(dim, 0.0));
  for (std::size_t t = 0; t < m.length(); ++t) {
    const auto x = state.relations.row(m[t]);
    const auto& prev = hs[t];
    auto& h = hs[t + 1];
    for (std::size_t i = 0; i < dim; ++i) {
      double a = p.bias[i];
      const auto wi = p.w_ih.row(i);
      const auto wh = p.w_hh.row(i);
      for (std::size_t j = 0; j < dim; ++j) a += wi[j] * x[j] + wh[j] * prev[j];
      h[i] = std::tanh(a);
    }
  }
  return hs;
}

}  // namespace

std::vector<double> metapath_representation(const Metapath& metapath, const EmbeddingState& state) {
  const std::size_t dim = state.dim();
  switch (state.sharing().strategy) {
    case Strategy::None: {
      const auto row = state.relations.row(minted_id(metapath, state));
      return {row.begin(), row.end()};
    }
    case Strategy::ModelCompose: {
      const bool add = state.sharing().composition == Composition::Add;
      std::vector<double> out(dim, add ? 0.0 : 1.0);
      for (RelationId r : metapath.relations()) {
        const auto row = state.relations.row(r);
        for (std::size_t k = 0; k < dim; ++k) {
          if (add) {
            out[k] += row[k];
          } else {
            out[k] *= row[k];
          }
        }
      }
      return out;
    }
    case Strategy::Rnn:
      return rnn_forward(metapath, state).back();
    case Strategy::Basis:
      return basis_combination(*state.basis, coefficient_row(state, minted_id(metapath, state)));
  }
  return {};
}

void strategy_backward(const Metapath& metapath, std::span<const double> upstream,
                       const EmbeddingState& state, Gradients& grads) {
  const std::size_t dim = state.dim();
  switch (state.sharing().strategy) {
    case Strategy::None: {
      auto& g = Gradients::row(grads.relation, minted_id(metapath, state), dim);
      for (std::size_t k = 0; k < dim; ++k) g[k] += upstream[k];
      return;
    }
    case Strategy::ModelCompose: {
      const bool add = state.sharing().composition == Composition::Add;
      for (std::size_t t = 0; t < metapath.length(); ++t) {
        auto& g = Gradients::row(grads.relation, metapath[t], dim);
        for (std::size_t k = 0; k < dim; ++k) {
          double local = 1.0;
          if (!add) {
            for (std::size_t s = 0; s < metapath.length(); ++s) {
              if (s != t) local *= state.relations.at(metapath[s], k);
            }
          }
          g[k] += upstream[k] * local;
        }
      }
      return;
    }
    case Strategy::Rnn: {
      const auto& p = *state.rnn;
      const auto hs = rnn_forward(metapath, state);
      auto& g_ih = Gradients::dense(grads.rnn_w_ih, dim * dim);
      auto& g_hh = Gradients::dense(grads.rnn_w_hh, dim * dim);
      auto& g_b = Gradients::dense(grads.rnn_bias, dim);
      std::vector<double> dh(upstream.begin(), upstream.end());
      std::vector<double> da(dim), dprev(dim);
      for (std::size_t t = metapath.length(); t-- > 0;) {
        const auto& h = hs[t + 1];
        const auto& prev = hs[t];
        const auto x = state.relations.row(metapath[t]);
        for (std::size_t i = 0; i < dim; ++i) da[i] = dh[i] * (1.0 - h[i] * h[i]);
        auto& g_x = Gradients::row(grads.relation, metapath[t], dim);
        std::fill(dprev.begin(), dprev.end(), 0.0);
        for (std::size_t i = 0; i < dim; ++i) {
          const double ai = da[i];
          g_b[i] += ai;
          const auto wi = p.w_ih.row(i);
          const auto wh = p.w_hh.row(i);
          for (std::size_t j = 0; j < dim; ++j) {
            g_ih[i * dim + j] += ai * x[j];
            g_hh[i * dim + j] += ai * prev[j];
            g_x[j] += wi[j] * ai;
            dprev[j] += wh[j] * ai;
          }
        }
        std::swap(dh, dprev);
      }
      return;
    }
    case Strategy::Basis:
      basis_backward(*state.basis, coefficient_row(state, minted_id(metapath, state)), upstream, grads);
      return;
  }
}

std::vector<double> relation_representation(RelationId r, const EmbeddingState& state) {
  if (state.has_free_row(r)) {
    const auto row = state.relations.row(r);
    return {row.begin(), row.end()};
  }
  if (r < state.num_original_relations()) {
    return basis_combination(*state.basis, coefficient_row(state, r));
  }
  return metapath_representation(state.registry.metapath_of(r), state);
}

void relation_backward(RelationId r, std::span<const double> upstream, const EmbeddingState& state,
                       Gradients& grads) {
  if (state.has_free_row(r)) {
    auto& g = Gradients::row(grads.relation, r, state.dim());
    for (std::size_t k = 0; k < state.dim(); ++k) g[k] += upstream[k];
    return;
  }
  if (r < state.num_original_relations()) {
    basis_backward(*state.basis, coefficient_row(state, r), upstream, grads);
    return;
  }
  strategy_backward(state.registry.metapath_of(r), upstream, state, grads);
}

}  // namespace war
