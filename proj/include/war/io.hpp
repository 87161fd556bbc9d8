#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "war/embedding.hpp"
#include "war/kg.hpp"

namespace war {

/// Little-endian f32 matrix: u32 rows, u32 dim, then rows*dim floats.
void write_matrix_f32(const Matrix& m, const std::string& path);
Matrix read_matrix_f32(const std::string& path);

/// `name<TAB>v1,...,vd` per row.
void write_matrix_tsv(const Matrix& m, const std::vector<std::string>& names, const std::string& path);

/// Vectors actually used for scoring every relation id, original and minted,
/// with names (minted relations are named by their bracketed metapath).
Matrix relation_vectors(const EmbeddingState& state);
std::vector<std::string> relation_names(const EmbeddingState& state, const Dictionary* relations);

/// Exact binary round trip of every parameter, the registry and the init rng.
void write_state(std::ostream& out, const EmbeddingState& state);
EmbeddingState read_state(std::istream& in);

namespace binio {
void put_u64(std::ostream& out, std::uint64_t v);
std::uint64_t get_u64(std::istream& in);
void put_f64(std::ostream& out, double v);
double get_f64(std::istream& in);
void put_string(std::ostream& out, const std::string& s);
std::string get_string(std::istream& in);
}  // namespace binio

}  // namespace war
