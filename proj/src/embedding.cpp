#include "war/embedding.hpp"

#include <algorithm>
#include <cmath>

#include "war/errors.hpp"

namespace war {

namespace {

void fill_uniform(std::vector<double>& v, std::size_t from, double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (std::size_t i = from; i < v.size(); ++i) v[i] = dist(rng);
}

void fill_normal(std::vector<double>& v, std::size_t from, double stddev, Rng& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (std::size_t i = from; i < v.size(); ++i) v[i] = dist(rng);
}

}  // namespace

EmbeddingState::EmbeddingState(std::size_t num_entities, std::size_t num_relations, std::size_t dim,
                               const SharingConfig& sharing, std::uint64_t seed)
    : entities(num_entities, dim),
      relations(num_relations, dim),
      registry(static_cast<RelationId>(num_relations)),
      init_rng(seed),
      dim_(dim),
      num_original_relations_(num_relations),
      sharing_(sharing) {
  if (dim == 0) throw ConfigError("embedding dimension must be >= 1");
  const double bound = 6.0 / std::sqrt(static_cast<double>(dim));
  fill_uniform(entities.data(), 0, bound, init_rng);
  fill_uniform(relations.data(), 0, bound, init_rng);

  if (sharing.strategy == Strategy::Rnn) {
    RnnParams p{Matrix(dim, dim), Matrix(dim, dim), std::vector<double>(dim, 0.0)};
    const double rb = 1.0 / std::sqrt(static_cast<double>(dim));
    fill_uniform(p.w_ih.data(), 0, rb, init_rng);
    fill_uniform(p.w_hh.data(), 0, rb, init_rng);
    rnn = std::move(p);
  } else if (sharing.strategy == Strategy::Basis) {
    std::size_t count = sharing.basis_count;
    if (count == 0) count = std::max<std::size_t>(1, std::min<std::size_t>(num_relations, 64));
    sharing_.basis_count = count;
    BasisParams p;
    p.vectors = Matrix(count, dim);
    fill_uniform(p.vectors.data(), 0, bound, init_rng);
    if (sharing.basis_for_original) {
      p.coeff_base = 0;
      p.coefficients = Matrix(num_relations, count);
      fill_normal(p.coefficients.data(), 0, 1.0 / std::sqrt(static_cast<double>(count)), init_rng);
    } else {
      p.coeff_base = static_cast<RelationId>(num_relations);
      p.coefficients = Matrix(0, count);
    }
    basis = std::move(p);
  }
}

void EmbeddingState::sync_minted() {
  const std::size_t minted = registry.size();
  if (minted <= synced_minted_) return;
  const std::size_t fresh = minted - synced_minted_;
  if (sharing_.strategy == Strategy::None) {
    const std::size_t old = relations.data().size();
    relations.add_rows(fresh);
    fill_uniform(relations.data(), old, 6.0 / std::sqrt(static_cast<double>(dim_)), init_rng);
  } else if (sharing_.strategy == Strategy::Basis) {
    auto& coeff = basis->coefficients;
    const std::size_t old = coeff.data().size();
    coeff.add_rows(fresh);
    fill_normal(coeff.data(), old, 1.0 / std::sqrt(static_cast<double>(coeff.cols())), init_rng);
  }
  synced_minted_ = minted;
}

bool EmbeddingState::has_free_row(RelationId r) const {
  if (r < num_original_relations_) {
    return !(sharing_.strategy == Strategy::Basis && sharing_.basis_for_original);
  }
  return sharing_.strategy == Strategy::None;
}

std::size_t EmbeddingState::parameter_count() const {
  std::size_t n = entities.data().size();
  const bool originals_free = !(sharing_.strategy == Strategy::Basis && sharing_.basis_for_original);
  if (originals_free) n += num_original_relations_ * dim_;
  if (sharing_.strategy == Strategy::None) n += (relations.rows() - num_original_relations_) * dim_;
  if (rnn) n += rnn->w_ih.data().size() + rnn->w_hh.data().size() + rnn->bias.size();
  if (basis) n += basis->vectors.data().size() + basis->coefficients.data().size();
  return n;
}

bool operator==(const EmbeddingState& a, const EmbeddingState& b) {
  return a.dim_ == b.dim_ && a.num_original_relations_ == b.num_original_relations_ &&
         a.synced_minted_ == b.synced_minted_ && a.entities == b.entities &&
         a.relations == b.relations && a.rnn == b.rnn && a.basis == b.basis &&
         a.registry.metapaths() == b.registry.metapaths() && a.init_rng == b.init_rng;
}

std::vector<double>& Gradients::row(std::map<std::uint32_t, std::vector<double>>& m,
                                    std::uint32_t id, std::size_t dim) {
  auto& v = m[id];
  if (v.empty()) v.assign(dim, 0.0);
  return v;
}

std::vector<double>& Gradients::row(std::map<std::size_t, std::vector<double>>& m, std::size_t id,
                                    std::size_t dim) {
  auto& v = m[id];
  if (v.empty()) v.assign(dim, 0.0);
  return v;
}

void Gradients::scale(double f) {
  auto scale_vec = [f](std::vector<double>& v) {
    for (double& x : v) x *= f;
  };
  for (auto& [k, v] : entity) scale_vec(v);
  for (auto& [k, v] : relation) scale_vec(v);
  for (auto& [k, v] : coefficient) scale_vec(v);
  scale_vec(rnn_w_ih);
  scale_vec(rnn_w_hh);
  scale_vec(rnn_bias);
  scale_vec(basis);
}

void Gradients::clear() {
  entity.clear();
  relation.clear();
  coefficient.clear();
  rnn_w_ih.clear();
  rnn_w_hh.clear();
  rnn_bias.clear();
  basis.clear();
}

}  // namespace war
