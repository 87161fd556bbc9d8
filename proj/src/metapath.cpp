#include "war/metapath.hpp"

#include "war/errors.hpp"

namespace war {

std::size_t MetapathHash::operator()(const Metapath& m) const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (RelationId r : m.relations()) {
    h ^= r + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h *= 0x100000001b3ULL;
  }
  return static_cast<std::size_t>(h);
}

std::string format_metapath(const Metapath& m, const Dictionary* relations) {
  std::string out;
  for (std::size_t i = 0; i < m.length(); ++i) {
    if (i) out += '|';
    if (relations && m[i] < relations->size()) {
      out += relations->name(m[i]);
    } else {
      out += std::to_string(m[i]);
    }
  }
  return out;
}

Metapath parse_metapath(const std::string& text, const Dictionary& relations) {
  std::vector<RelationId> rels;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto pos = text.find('|', start);
    if (pos == std::string::npos) pos = text.size();
    const std::string name = text.substr(start, pos - start);
    auto id = relations.find(name);
    if (!id) throw LookupError("unknown relation '" + name + "' in metapath '" + text + "'");
    rels.push_back(*id);
    start = pos + 1;
  }
  return Metapath(std::move(rels));
}

}  // namespace war
