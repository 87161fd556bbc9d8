#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "war/augment.hpp"
#include "war/kg.hpp"
#include "war/rng.hpp"

namespace war {

/// Dense row-major matrix of f64 rows.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  double& at(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }
  void add_rows(std::size_t n) {
    rows_ += n;
    data_.resize(rows_ * cols_, 0.0);
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

enum class Scoring { TransE_L1, TransE_L2, DistMult };
enum class Strategy { None, ModelCompose, Rnn, Basis };
enum class Composition { Add, Hadamard };

/// Single-layer tanh recurrence h_t = tanh(W_ih x_t + W_hh h_{t-1} + b), h_0 = 0.
struct RnnParams {
  Matrix w_ih;
  Matrix w_hh;
  std::vector<double> bias;

  friend bool operator==(const RnnParams&, const RnnParams&) = default;
};

/// r = sum_b coeff[b] * vectors.row(b). Coefficient row k belongs to relation
/// `coeff_base + k`.
struct BasisParams {
  Matrix vectors;
  Matrix coefficients;
  RelationId coeff_base = 0;

  friend bool operator==(const BasisParams&, const BasisParams&) = default;
};

struct SharingConfig {
  Strategy strategy = Strategy::None;
  Composition composition = Composition::Add;
  std::size_t basis_count = 0;  ///< 0 selects min(|R|, 64)
  bool basis_for_original = false;
};

/// All trainable parameters plus the metapath registry that names minted rows.
class EmbeddingState {
 public:
  EmbeddingState() = default;
  EmbeddingState(std::size_t num_entities, std::size_t num_relations, std::size_t dim,
                 const SharingConfig& sharing, std::uint64_t seed);

  std::size_t dim() const { return dim_; }
  std::size_t num_entities() const { return entities.rows(); }
  std::size_t num_original_relations() const { return num_original_relations_; }
  const SharingConfig& sharing() const { return sharing_; }

  /// Allocates parameters for relations minted since the last call.
  void sync_minted();

  /// True when relation r is represented by its own row in `relations`.
  bool has_free_row(RelationId r) const;

  /// Trainable scalar count, for parameter-budget introspection.
  std::size_t parameter_count() const;

  Matrix entities;
  Matrix relations;  ///< original rows, plus minted rows under Strategy::None
  std::optional<RnnParams> rnn;
  std::optional<BasisParams> basis;
  NewRelationRegistry registry;
  Rng init_rng;

  friend bool operator==(const EmbeddingState& a, const EmbeddingState& b);

 private:
  friend class StateSerializer;
  std::size_t dim_ = 0;
  std::size_t num_original_relations_ = 0;
  std::size_t synced_minted_ = 0;
  SharingConfig sharing_;
};

/// Sparse rows plus dense blocks, keyed deterministically.
struct Gradients {
  std::map<EntityId, std::vector<double>> entity;
  std::map<RelationId, std::vector<double>> relation;
  std::map<std::size_t, std::vector<double>> coefficient;  ///< by coefficient row
  std::vector<double> rnn_w_ih, rnn_w_hh, rnn_bias, basis;

  static std::vector<double>& row(std::map<std::uint32_t, std::vector<double>>& m, std::uint32_t id,
                                  std::size_t dim);
  static std::vector<double>& row(std::map<std::size_t, std::vector<double>>& m, std::size_t id,
                                  std::size_t dim);
  static std::vector<double>& dense(std::vector<double>& v, std::size_t n) {
    if (v.empty()) v.assign(n, 0.0);
    return v;
  }
  void scale(double f);
  void clear();
};

}  // namespace war
