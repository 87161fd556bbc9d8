#include "doctest.h"

#include <cmath>
#include <sstream>

#include "support/oracles.hpp"
#include "war/augment.hpp"
#include "war/miner.hpp"
#include "war/rules.hpp"

using namespace war;

namespace {

InformativeMap single(const Metapath& m, double z) {
  InformativeMap out;
  out[m] = MetapathInfo{m, z, {}, 1};
  return out;
}

RuleMaps rules_for(const Metapath& m, std::map<RelationId, double> entries) {
  RuleMaps out;
  out[m] = RuleMap{m, std::move(entries), 0.1};
  return out;
}

RandomWalk path_walk() { return {{0, 1, 2}, {0, 1}}; }

}  // namespace

TEST_CASE("random walk on a path is deterministic") {
  auto g = build_adjacency({{0, 0, 1}, {1, 1, 2}}, 3);
  Rng rng(1);
  for (int i = 0; i < 20; ++i) {
    auto w = random_walk(g, 0, 3, rng);
    CHECK(w.nodes == std::vector<EntityId>{0, 1, 2});
    CHECK(w.relations == std::vector<RelationId>{0, 1});
  }
  auto w = random_walk(g, 2, 3, rng);
  CHECK(w.nodes == std::vector<EntityId>{2});
  CHECK(w.relations.empty());
}

TEST_CASE("random walk picks neighbours uniformly") {
  auto g = build_adjacency({{0, 0, 1}, {0, 0, 2}}, 3);
  Rng rng(12);
  int x = 0;
  for (int i = 0; i < 10'000; ++i) x += random_walk(g, 0, 2, rng).nodes[1] == 1 ? 1 : 0;
  CHECK(std::abs(x - 5000) <= 150);
}

TEST_CASE("walks follow real edges") {
  Rng gen(6);
  auto edges = oracle::random_multigraph(gen, 30, 4, 90);
  auto g = build_adjacency(edges, 30);
  Rng rng(2);
  for (EntityId s = 0; s < 30; ++s) {
    for (std::size_t len : {2u, 3u, 5u}) {
      auto w = random_walk(g, s, len, rng);
      CHECK(w.nodes.front() == s);
      CHECK(w.nodes.size() <= len);
      CHECK(w.relations.size() + 1 == w.nodes.size());
      for (std::size_t k = 0; k + 1 < w.nodes.size(); ++k) {
        bool found = false;
        for (const auto& t : edges) found |= t == Triplet{w.nodes[k], w.relations[k], w.nodes[k + 1]};
        CHECK(found);
      }
      if (w.nodes.size() < len) CHECK(g.out_degree(w.nodes.back()) == 0);
    }
  }
}

TEST_CASE("walk to triplets") {
  const Metapath m{0, 1};
  NewRelationRegistry reg(5);
  Rng rng(0);

  SUBCASE("empty rulemap mints a relation") {
    AugmentationIndex idx(single(m, 0.8), {}, AugmentMode::Metapaths);
    auto out = walk_to_triplets(path_walk(), idx, reg, rng);
    REQUIRE(out.size() == 1);
    CHECK(out[0].head == 0);
    CHECK(out[0].tail == 2);
    CHECK(out[0].relation == 5);
    CHECK(out[0].weight == 0.8);
    CHECK(out[0].source == TripletSource::Minted);
    CHECK(reg.metapath_of(5) == m);
  }
  SUBCASE("rulemap maps onto an existing relation") {
    AugmentationIndex idx(single(m, 0.8), rules_for(m, {{3, 1.0}}), AugmentMode::Metapaths);
    auto out = walk_to_triplets(path_walk(), idx, reg, rng);
    REQUIRE(out.size() == 1);
    CHECK(out[0].relation == 3);
    CHECK(out[0].weight == 0.8);
    CHECK(out[0].source == TripletSource::RuleMapped);
    CHECK(reg.size() == 0);
  }
  SUBCASE("back-and-forth walk emits nothing for the self pair") {
    AugmentationIndex idx(single(m, 0.8), {}, AugmentMode::Metapaths);
    auto out = walk_to_triplets({{0, 1, 0}, {0, 1}}, idx, reg, rng);
    CHECK(out.empty());
    CHECK(reg.size() == 0);
  }
  SUBCASE("uninformative metapaths emit nothing") {
    AugmentationIndex idx(single(Metapath{1, 0}, 0.8), {}, AugmentMode::Metapaths);
    CHECK(walk_to_triplets(path_walk(), idx, reg, rng).empty());
  }
  SUBCASE("rules-only mode drops rule-less metapaths") {
    InformativeMap inf = single(m, 0.8);
    inf[Metapath{1, 2}] = MetapathInfo{Metapath{1, 2}, 0.5, {}, 1};
    AugmentationIndex idx(inf, rules_for(Metapath{1, 2}, {{4, 0.7}}), AugmentMode::RulesOnly);
    CHECK(walk_to_triplets(path_walk(), idx, reg, rng).empty());
    auto out = walk_to_triplets({{0, 1, 2}, {1, 2}}, idx, reg, rng);
    REQUIRE(out.size() == 1);
    CHECK(out[0].relation == 4);
    CHECK(out[0].weight == doctest::Approx(0.35));
  }
  SUBCASE("mode none disables augmentation") {
    AugmentationIndex idx(single(m, 0.8), {}, AugmentMode::None);
    CHECK(walk_to_triplets(path_walk(), idx, reg, rng).empty());
  }
}

TEST_CASE("pairs at distance two and more") {
  // Walk of 4 nodes: pairs (0,2), (1,3) of length 2 and (0,3) of length 3.
  InformativeMap inf = single(Metapath{0, 1}, 0.5);
  inf[Metapath{1, 2}] = {Metapath{1, 2}, 0.5, {}, 1};
  inf[Metapath{0, 1, 2}] = {Metapath{0, 1, 2}, 0.25, {}, 1};
  AugmentationIndex idx(inf, {}, AugmentMode::Metapaths);
  NewRelationRegistry reg(3);
  Rng rng(0);
  auto out = walk_to_triplets({{10, 11, 12, 13}, {0, 1, 2}}, idx, reg, rng);
  REQUIRE(out.size() == 3);
  std::vector<std::pair<EntityId, EntityId>> ends;
  for (const auto& t : out) {
    ends.emplace_back(t.head, t.tail);
    CHECK(reg.metapath_of(t.relation).length() == static_cast<std::size_t>(t.tail - t.head));
  }
  CHECK(ends == std::vector<std::pair<EntityId, EntityId>>{{10, 12}, {10, 13}, {11, 13}});
}

TEST_CASE("rule sampling frequencies") {
  const Metapath m{0, 1};
  NewRelationRegistry reg(9);
  const int n = 20'000;

  SUBCASE("normalized confidences") {
    AugmentationIndex idx(single(m, 1.0), rules_for(m, {{3, 0.9}, {4, 0.6}}), AugmentMode::Metapaths);
    Rng rng(3);
    int q3 = 0;
    for (int i = 0; i < n; ++i) {
      auto out = walk_to_triplets(path_walk(), idx, reg, rng);
      REQUIRE(out.size() == 1);
      q3 += out[0].relation == 3 ? 1 : 0;
      CHECK(out[0].weight == (out[0].relation == 3 ? 0.9 : 0.6));
    }
    const double sigma = std::sqrt(n * 0.6 * 0.4);
    CHECK(std::abs(q3 - 0.6 * n) <= 3 * sigma);
  }
  SUBCASE("raw confidences leave the remainder unmapped") {
    AugmentationIndex idx(single(m, 1.0), rules_for(m, {{3, 0.3}, {4, 0.2}}), AugmentMode::Metapaths,
                          RuleSampling::Raw);
    Rng rng(4);
    int q3 = 0, none = 0;
    for (int i = 0; i < n; ++i) {
      auto out = walk_to_triplets(path_walk(), idx, reg, rng);
      if (out.empty()) {
        ++none;
      } else {
        q3 += out[0].relation == 3 ? 1 : 0;
      }
    }
    CHECK(std::abs(q3 - 0.3 * n) <= 3 * std::sqrt(n * 0.3 * 0.7));
    CHECK(std::abs(none - 0.5 * n) <= 3 * std::sqrt(n * 0.25));
    CHECK(reg.size() == 0);
  }
}

TEST_CASE("registry is injective and stable") {
  NewRelationRegistry reg(100);
  const auto a = reg.get_or_mint(Metapath{0, 1});
  const auto b = reg.get_or_mint(Metapath{1, 0});
  const auto c = reg.get_or_mint(Metapath{0, 1, 2});
  CHECK(a == 100);
  CHECK(b == 101);
  CHECK(c == 102);
  CHECK(reg.get_or_mint(Metapath{1, 0}) == b);
  CHECK(reg.find(Metapath{0, 1}) == a);
  CHECK_FALSE(reg.find(Metapath{2, 2}).has_value());
  CHECK(reg.is_minted(101));
  CHECK_FALSE(reg.is_minted(99));
  CHECK_FALSE(reg.is_minted(103));
  NewRelationRegistry copy = reg;
  CHECK(copy.get_or_mint(Metapath{0, 1, 2}) == c);
  CHECK(copy.metapaths() == reg.metapaths());
}

TEST_CASE("minibatch composition") {
  Rng gen(21);
  auto edges = oracle::random_multigraph(gen, 40, 3, 160);
  auto g = build_adjacency(edges, 40, 3);
  MinerOptions mo;
  mo.threshold = 0.05;
  auto inf = mine_informative_metapaths(g, mo);
  REQUIRE_FALSE(inf.empty());
  AugmentationIndex idx(inf, build_rulemaps(g, inf, 0.5), AugmentMode::Metapaths);
  std::vector<EntityId> nodes(40);
  std::iota(nodes.begin(), nodes.end(), EntityId{0});

  SUBCASE("default balances walk triplets with original edges") {
    NewRelationRegistry reg(3);
    Rng rng(1);
    auto batch = build_minibatch(g, nodes, idx, reg, MinibatchOptions{}, 77, rng);
    std::size_t originals = 0;
    for (const auto& t : batch) {
      if (t.source == TripletSource::Original) {
        ++originals;
        CHECK(t.weight == 1.0);
        CHECK(std::find(edges.begin(), edges.end(), t.triplet()) != edges.end());
      } else {
        CHECK(t.head != t.tail);
        if (t.source == TripletSource::Minted) {
          const auto& info = inf.at(reg.metapath_of(t.relation));
          CHECK(t.weight == info.z);
          CHECK(t.weight >= mo.threshold);
          CHECK(info.metapath.length() == 2);
        }
      }
    }
    CHECK(originals == batch.size() - originals);
    CHECK(originals > 0);
  }
  SUBCASE("same seeds give the same batch") {
    NewRelationRegistry r1(3), r2(3);
    Rng a(5), b(5);
    auto x = build_minibatch(g, nodes, idx, r1, MinibatchOptions{}, 8, a);
    auto y = build_minibatch(g, nodes, idx, r2, MinibatchOptions{}, 8, b);
    REQUIRE(x.size() == y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      CHECK(x[i].triplet() == y[i].triplet());
      CHECK(x[i].weight == y[i].weight);
    }
    CHECK(r1.metapaths() == r2.metapaths());
  }
  SUBCASE("empty informative set leaves only original edges") {
    AugmentationIndex empty({}, {}, AugmentMode::Metapaths);
    NewRelationRegistry reg(3);
    Rng rng(1);
    MinibatchOptions o;
    o.original_edges = 25;
    auto batch = build_minibatch(g, nodes, empty, reg, o, 1, rng);
    CHECK(batch.size() == 25);
    for (const auto& t : batch) CHECK(t.source == TripletSource::Original);
    o.original_edges.reset();
    o.min_original_edges = 7;
    CHECK(build_minibatch(g, nodes, empty, reg, o, 1, rng).size() == 7);
  }
}

TEST_CASE("augmented triplet dump") {
  auto ents = std::make_shared<Dictionary>();
  for (auto n : {"a", "b", "c"}) ents->get_or_add(n);
  auto rels = std::make_shared<Dictionary>();
  for (auto n : {"p", "q"}) rels->get_or_add(n);
  NewRelationRegistry reg(2);
  const auto minted = reg.get_or_mint(Metapath{0, 1});
  std::vector<AugmentedTriplet> t{{0, 1, 2, 0.25, TripletSource::RuleMapped},
                                  {1, minted, 2, 0.5, TripletSource::Minted}};
  std::ostringstream out;
  write_augmented_tsv(out, t, ents.get(), rels.get(), reg);
  CHECK(out.str() == "a\tq\tc\t0.25\nb\t[p|q]\tc\t0.5\n");
}
