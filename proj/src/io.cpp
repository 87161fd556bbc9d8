#include "war/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "war/errors.hpp"
#include "war/metapath.hpp"
#include "war/sharing.hpp"
#include "war/text.hpp"

namespace war {

namespace binio {

// Integers are written little-endian byte by byte; doubles by their bit pattern.
void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw DataError("truncated binary stream");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{b[i]} << (8 * i);
  return v;
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }
double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

void put_string(std::ostream& out, const std::string& s) {
  put_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
  const auto n = get_u64(in);
  if (n > (1ULL << 32)) throw DataError("implausible string length in binary stream");
  std::string s(n, '\0');
  if (!in.read(s.data(), static_cast<std::streamsize>(n))) throw DataError("truncated binary stream");
  return s;
}

}  // namespace binio

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw DataError("truncated matrix file");
  return std::uint32_t{b[0]} | std::uint32_t{b[1]} << 8 | std::uint32_t{b[2]} << 16 |
         std::uint32_t{b[3]} << 24;
}

void put_matrix(std::ostream& out, const Matrix& m) {
  binio::put_u64(out, m.rows());
  binio::put_u64(out, m.cols());
  for (double v : m.data()) binio::put_f64(out, v);
}

Matrix get_matrix(std::istream& in) {
  const auto rows = binio::get_u64(in);
  const auto cols = binio::get_u64(in);
  if (rows * cols > (1ULL << 34)) throw DataError("implausible matrix size in checkpoint");
  Matrix m(rows, cols);
  for (double& v : m.data()) v = binio::get_f64(in);
  return m;
}

}  // namespace

void write_matrix_f32(const Matrix& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  put_u32(out, static_cast<std::uint32_t>(m.rows()));
  put_u32(out, static_cast<std::uint32_t>(m.cols()));
  for (double v : m.data()) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

Matrix read_matrix_f32(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  const auto rows = get_u32(in);
  const auto cols = get_u32(in);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = std::bit_cast<float>(get_u32(in));
  return m;
}

void write_matrix_tsv(const Matrix& m, const std::vector<std::string>& names, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out << (i < names.size() ? names[i] : std::to_string(i)) << '\t';
    const auto row = m.row(i);
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) out << ',';
      out << text::format_real(static_cast<float>(row[k]));
    }
    out << '\n';
  }
}

Matrix relation_vectors(const EmbeddingState& state) {
  const std::size_t n = state.num_original_relations() + state.registry.size();
  Matrix m(n, state.dim());
  for (std::size_t r = 0; r < n; ++r) {
    const auto v = relation_representation(static_cast<RelationId>(r), state);
    std::copy(v.begin(), v.end(), m.row(r).begin());
  }
  return m;
}

std::vector<std::string> relation_names(const EmbeddingState& state, const Dictionary* relations) {
  std::vector<std::string> names;
  for (std::size_t r = 0; r < state.num_original_relations(); ++r) {
    names.push_back(relations && r < relations->size() ? relations->name(static_cast<std::uint32_t>(r))
                                                       : std::to_string(r));
  }
  for (const auto& m : state.registry.metapaths()) names.push_back("[" + format_metapath(m, relations) + "]");
  return names;
}

class StateSerializer {
 public:
  static void write(std::ostream& out, const EmbeddingState& s) {
    out.write("WARSTAT1", 8);
    binio::put_u64(out, s.dim_);
    binio::put_u64(out, s.num_original_relations_);
    binio::put_u64(out, s.synced_minted_);
    binio::put_u64(out, static_cast<std::uint64_t>(s.sharing_.strategy));
    binio::put_u64(out, static_cast<std::uint64_t>(s.sharing_.composition));
    binio::put_u64(out, s.sharing_.basis_count);
    binio::put_u64(out, s.sharing_.basis_for_original ? 1 : 0);
    put_matrix(out, s.entities);
    put_matrix(out, s.relations);
    binio::put_u64(out, s.rnn ? 1 : 0);
    if (s.rnn) {
      put_matrix(out, s.rnn->w_ih);
      put_matrix(out, s.rnn->w_hh);
      binio::put_u64(out, s.rnn->bias.size());
      for (double v : s.rnn->bias) binio::put_f64(out, v);
    }
    binio::put_u64(out, s.basis ? 1 : 0);
    if (s.basis) {
      put_matrix(out, s.basis->vectors);
      put_matrix(out, s.basis->coefficients);
      binio::put_u64(out, s.basis->coeff_base);
    }
    binio::put_u64(out, s.registry.first_id());
    binio::put_u64(out, s.registry.size());
    for (const auto& m : s.registry.metapaths()) {
      binio::put_u64(out, m.length());
      for (RelationId r : m.relations()) binio::put_u64(out, r);
    }
    std::ostringstream rng;
    rng << s.init_rng;
    binio::put_string(out, rng.str());
  }

  static EmbeddingState read(std::istream& in) {
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, "WARSTAT1", 8) != 0) {
      throw DataError("not an embedding state (bad magic)");
    }
    EmbeddingState s;
    s.dim_ = binio::get_u64(in);
    s.num_original_relations_ = binio::get_u64(in);
    s.synced_minted_ = binio::get_u64(in);
    s.sharing_.strategy = static_cast<Strategy>(binio::get_u64(in));
    s.sharing_.composition = static_cast<Composition>(binio::get_u64(in));
    s.sharing_.basis_count = binio::get_u64(in);
    s.sharing_.basis_for_original = binio::get_u64(in) != 0;
    s.entities = get_matrix(in);
    s.relations = get_matrix(in);
    if (binio::get_u64(in)) {
      RnnParams p;
      p.w_ih = get_matrix(in);
      p.w_hh = get_matrix(in);
      p.bias.resize(binio::get_u64(in));
      for (double& v : p.bias) v = binio::get_f64(in);
      s.rnn = std::move(p);
    }
    if (binio::get_u64(in)) {
      BasisParams p;
      p.vectors = get_matrix(in);
      p.coefficients = get_matrix(in);
      p.coeff_base = static_cast<RelationId>(binio::get_u64(in));
      s.basis = std::move(p);
    }
    NewRelationRegistry reg(static_cast<RelationId>(binio::get_u64(in)));
    const auto n = binio::get_u64(in);
    for (std::uint64_t i = 0; i < n; ++i) {
      std::vector<RelationId> rels(binio::get_u64(in));
      for (auto& r : rels) r = static_cast<RelationId>(binio::get_u64(in));
      reg.get_or_mint(Metapath(std::move(rels)));
    }
    s.registry = reg;
    std::istringstream rng(binio::get_string(in));
    rng >> s.init_rng;
    if (!rng) throw DataError("corrupt rng state in checkpoint");
    return s;
  }
};

void write_state(std::ostream& out, const EmbeddingState& state) { StateSerializer::write(out, state); }
EmbeddingState read_state(std::istream& in) { return StateSerializer::read(in); }

}  // namespace war
