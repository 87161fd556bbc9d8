#pragma once

#include <compare>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "war/kg.hpp"

namespace war {

/// Ordered, direction-sensitive relation sequence of length >= 1.
class Metapath {
 public:
  Metapath() = default;
  Metapath(std::initializer_list<RelationId> rels) : relations_(rels) {}
  explicit Metapath(std::vector<RelationId> rels) : relations_(std::move(rels)) {}
  explicit Metapath(std::span<const RelationId> rels) : relations_(rels.begin(), rels.end()) {}

  std::size_t length() const { return relations_.size(); }
  bool empty() const { return relations_.empty(); }
  RelationId operator[](std::size_t i) const { return relations_[i]; }
  const std::vector<RelationId>& relations() const { return relations_; }

  Metapath prefix(std::size_t n) const {
    return Metapath(std::vector<RelationId>(relations_.begin(), relations_.begin() + n));
  }
  Metapath extended(RelationId r) const {
    auto rels = relations_;
    rels.push_back(r);
    return Metapath(std::move(rels));
  }

  friend bool operator==(const Metapath&, const Metapath&) = default;
  friend auto operator<=>(const Metapath&, const Metapath&) = default;

 private:
  std::vector<RelationId> relations_;
};

struct MetapathHash {
  std::size_t operator()(const Metapath& m) const noexcept;
};

/// `name1|name2|...` using the relation dictionary (ids when no dictionary).
std::string format_metapath(const Metapath& m, const Dictionary* relations);

/// Inverse of format_metapath. Throws LookupError on unknown names.
Metapath parse_metapath(const std::string& text, const Dictionary& relations);

}  // namespace war
