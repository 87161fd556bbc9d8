#include "war/kg.hpp"

#include <algorithm>
#include <fstream>
#include <random>

#include "war/errors.hpp"

namespace war {

std::uint32_t Dictionary::get_or_add(std::string_view name) {
  std::string key(name);
  auto it = index_.find(key);
  if (it != index_.end()) return it->second;
  const auto id = static_cast<std::uint32_t>(names_.size());
  names_.push_back(key);
  index_.emplace(std::move(key), id);
  return id;
}

std::optional<std::uint32_t> Dictionary::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

KnowledgeGraph build_adjacency(std::vector<Triplet> triplets, std::size_t num_entities,
                               std::size_t num_relations,
                               std::shared_ptr<const Dictionary> entity_dict,
                               std::shared_ptr<const Dictionary> relation_dict,
                               std::vector<std::uint32_t> node_types) {
  if (num_relations == 0) {
    for (const auto& t : triplets) num_relations = std::max<std::size_t>(num_relations, t.relation + 1);
  }
  for (std::size_t i = 0; i < triplets.size(); ++i) {
    const auto& t = triplets[i];
    if (t.head >= num_entities || t.tail >= num_entities || t.relation >= num_relations) {
      throw DataError("triplet " + std::to_string(i) + " (" + std::to_string(t.head) + "," +
                      std::to_string(t.relation) + "," + std::to_string(t.tail) +
                      ") has an id out of range");
    }
  }
  if (!node_types.empty() && node_types.size() != num_entities) {
    throw DataError("node type table size does not match entity count");
  }

  KnowledgeGraph g;
  g.num_entities_ = num_entities;
  g.num_relations_ = num_relations;
  g.offsets_.assign(num_entities + 1, 0);
  g.relation_counts_.assign(num_relations, 0);
  for (const auto& t : triplets) {
    ++g.offsets_[t.head + 1];
    ++g.relation_counts_[t.relation];
  }
  for (std::size_t n = 0; n < num_entities; ++n) g.offsets_[n + 1] += g.offsets_[n];

  g.adjacency_.resize(triplets.size());
  std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  for (std::size_t i = 0; i < triplets.size(); ++i) {
    const auto& t = triplets[i];
    g.adjacency_[cursor[t.head]++] = OutEdge{t.relation, t.tail, static_cast<EdgeId>(i)};
  }
  g.triplets_ = std::move(triplets);
  g.entity_dict_ = std::move(entity_dict);
  g.relation_dict_ = std::move(relation_dict);
  g.node_types_ = std::move(node_types);
  return g;
}

KnowledgeGraph sample_edges(const KnowledgeGraph& graph, double p, std::uint64_t seed) {
  if (!(p > 0.0 && p <= 1.0)) {
    throw ConfigError("edge sampling probability must lie in (0, 1], got " + std::to_string(p));
  }
  std::vector<Triplet> kept;
  if (p == 1.0) {
    kept = graph.triplets();
  } else {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution keep(p);
    kept.reserve(static_cast<std::size_t>(graph.num_edges() * p * 1.1) + 16);
    for (const auto& t : graph.triplets()) {
      if (keep(rng)) kept.push_back(t);
    }
  }
  return build_adjacency(std::move(kept), graph.num_entities(), graph.num_relations(),
                         graph.entity_dict(), graph.relation_dict(), graph.node_types());
}

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      cols.push_back(line.substr(start));
      break;
    }
    cols.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return cols;
}

struct RawTriple {
  std::string head, relation, tail;
  std::size_t line;
};

std::vector<RawTriple> read_triples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open triple file: " + path);
  std::vector<RawTriple> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cols = split_tabs(line);
    if (cols.size() != 3) {
      throw ParseError(path, lineno,
                       "expected 3 tab-separated columns, found " + std::to_string(cols.size()));
    }
    out.push_back({std::string(cols[0]), std::string(cols[1]), std::string(cols[2]), lineno});
  }
  return out;
}

}  // namespace

Dictionary load_dictionary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dictionary file: " + path);
  std::vector<std::pair<std::uint64_t, std::string>> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cols = split_tabs(line);
    if (cols.size() != 2) throw ParseError(path, lineno, "expected `id<TAB>name`");
    std::uint64_t id = 0;
    try {
      std::size_t used = 0;
      id = std::stoull(std::string(cols[0]), &used);
      if (used != cols[0].size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw ParseError(path, lineno, "invalid id '" + std::string(cols[0]) + "'");
    }
    entries.emplace_back(id, std::string(cols[1]));
  }
  std::sort(entries.begin(), entries.end());
  Dictionary dict;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].first != i) throw DataError(path + ": dictionary ids must be contiguous from 0");
    if (dict.get_or_add(entries[i].second) != i) {
      throw DataError(path + ": duplicate name '" + entries[i].second + "'");
    }
  }
  return dict;
}

void save_dictionary(const Dictionary& dict, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write dictionary file: " + path);
  for (std::size_t i = 0; i < dict.size(); ++i) out << i << '\t' << dict.name(i) << '\n';
}

DatasetSplit load_tsv_dataset(const std::string& train_path, const std::string& valid_path,
                              const std::string& test_path, const LoadOptions& options) {
  const std::string* paths[3] = {&train_path, &valid_path, &test_path};
  std::vector<RawTriple> raw[3];
  for (int s = 0; s < 3; ++s) raw[s] = read_triples(*paths[s]);

  const bool external_entities = options.entity_dict_path.has_value();
  const bool external_relations = options.relation_dict_path.has_value();
  auto entities = std::make_shared<Dictionary>(
      external_entities ? load_dictionary(*options.entity_dict_path) : Dictionary{});
  auto relations = std::make_shared<Dictionary>(
      external_relations ? load_dictionary(*options.relation_dict_path) : Dictionary{});

  auto resolve = [](Dictionary& dict, bool external, const std::string& name,
                    const std::string& path, std::size_t line, const char* kind) {
    if (!external) return dict.get_or_add(name);
    auto id = dict.find(name);
    if (!id) {
      throw LookupError(path + ":" + std::to_string(line) + ": unknown " + kind + " '" + name + "'");
    }
    return *id;
  };

  std::vector<Triplet> ids[3];
  for (int s = 0; s < 3; ++s) {
    ids[s].reserve(raw[s].size());
    for (const auto& r : raw[s]) {
      Triplet t;
      t.head = resolve(*entities, external_entities, r.head, *paths[s], r.line, "entity");
      t.relation = resolve(*relations, external_relations, r.relation, *paths[s], r.line, "relation");
      t.tail = resolve(*entities, external_entities, r.tail, *paths[s], r.line, "entity");
      ids[s].push_back(t);
    }
  }

  DatasetSplit split;
  split.num_base_relations = relations->size();
  if (options.add_inverse) {
    const std::size_t base = relations->size();
    for (std::size_t r = 0; r < base; ++r) {
      const std::string inv = relations->name(static_cast<std::uint32_t>(r)) + "_inv";
      relations->get_or_add(inv);
    }
    const std::size_t n = ids[0].size();
    ids[0].reserve(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
      const Triplet t = ids[0][i];
      const auto inv = *relations->find(relations->name(t.relation) + "_inv");
      ids[0].push_back(Triplet{t.tail, inv, t.head});
    }
  }

  split.entities = entities;
  split.relations = relations;
  const std::size_t ne = entities->size();
  const std::size_t nr = relations->size();
  split.train = build_adjacency(std::move(ids[0]), ne, nr, entities, relations);
  split.valid = build_adjacency(std::move(ids[1]), ne, nr, entities, relations);
  split.test = build_adjacency(std::move(ids[2]), ne, nr, entities, relations);
  return split;
}

}  // namespace war
