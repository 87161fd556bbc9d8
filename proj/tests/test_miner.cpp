#include "doctest.h"

#include <sstream>

#include "support/oracles.hpp"
#include "support/tempdir.hpp"
#include "war/errors.hpp"
#include "war/miner.hpp"

using namespace war;

namespace {

const JoinGroup* find_group(const JoinTable& t, const Metapath& m) {
  for (const auto& g : t.groups()) {
    if (g.metapath == m) return &g;
  }
  return nullptr;
}

MinerOptions all_paths(std::size_t len) {
  MinerOptions o;
  o.max_length = len;
  o.threshold = 1e-300;
  return o;
}

}  // namespace

TEST_CASE("join of a path graph") {
  auto g = build_adjacency({{0, 0, 1}, {1, 1, 2}}, 3);
  auto base = JoinTable::single_hop(g);
  auto two = extend_join(base, base);
  REQUIRE(two.rows() == 1);
  CHECK(two.length() == 2);
  CHECK(two.src(0) == 0);
  CHECK(two.dst(0) == 2);
  REQUIRE(two.groups().size() == 1);
  CHECK(two.groups()[0].metapath == Metapath{0, 1});
}

TEST_CASE("join of a triangle") {
  // a->b (r0), b->c (r1), a->c (r2)
  auto g = build_adjacency({{0, 0, 1}, {1, 1, 2}, {0, 2, 2}}, 3);
  auto base = JoinTable::single_hop(g);
  auto two = extend_join(base, base);
  CHECK(two.rows() == 1);
  CHECK(two.groups()[0].metapath == Metapath{0, 1});
  auto dfs = oracle::enumerate_paths(g.triplets(), 2);
  std::size_t two_paths = 0;
  for (const auto& [m, s] : dfs) two_paths += m.length() == 2 ? s.instances : 0;
  CHECK(two_paths == two.rows());

  const auto a = compute_association(two, two.groups()[0], 0, 1.0, 1);
  REQUIRE(a);
  CHECK(a->association == 1.0);
  CHECK(a->edges_covered == 1);
}

TEST_CASE("edges sharing one source do not compose") {
  auto g = build_adjacency({{0, 0, 1}, {0, 1, 2}, {0, 0, 3}}, 4);
  auto base = JoinTable::single_hop(g);
  CHECK(extend_join(base, base).rows() == 0);
  CHECK(mine_informative_metapaths(g, all_paths(3)).empty());
}

TEST_CASE("association counts distinct covered edges") {
  // r0 edges a->b, d->e; r1 edge b->c.
  auto g = build_adjacency({{0, 0, 1}, {3, 0, 4}, {1, 1, 2}}, 5);
  auto base = JoinTable::single_hop(g);
  auto two = extend_join(base, base);
  const auto* grp = find_group(two, Metapath{0, 1});
  REQUIRE(grp);
  CHECK(compute_association(two, *grp, 0, 1.0, 2)->association == 0.5);
  CHECK(compute_association(two, *grp, 1, 1.0, 1)->association == 1.0);

  SUBCASE("single hop is always fully associated") {
    for (const auto& g1 : base.groups()) {
      CHECK(compute_association(base, g1, 0, 1.0, 0)->association == 1.0);
    }
  }
  SUBCASE("a fan-out counts the first edge once") {
    auto h = build_adjacency({{0, 0, 1}, {1, 1, 2}, {1, 1, 3}, {5, 0, 6}}, 7);
    auto hb = JoinTable::single_hop(h);
    auto ht = extend_join(hb, hb);
    const auto a = compute_association(ht, ht.groups()[0], 0, 1.0, 2);
    CHECK(ht.groups()[0].rows() == 2);
    CHECK(a->edges_covered == 1);
    CHECK(a->association == 0.5);
  }
}

TEST_CASE("mining a triangle") {
  auto g = build_adjacency({{0, 0, 1}, {1, 1, 2}, {0, 2, 2}}, 3);
  MinerOptions o;
  o.max_length = 2;
  o.threshold = 0.5;
  auto res = mine_informative_metapaths(g, o);
  REQUIRE(res.size() == 1);
  CHECK(res.begin()->first == Metapath{0, 1});
  CHECK(res.begin()->second.z == 1.0);
  CHECK(res.begin()->second.instance_count == 1);
}

TEST_CASE("join rows and associations equal the path enumeration") {
  Rng rng(2024);
  for (int trial = 0; trial < 15; ++trial) {
    const std::size_t n = 5 + trial * 3, rels = 1 + trial % 6;
    auto edges = oracle::random_multigraph(rng, n, rels, 20 + trial * 20);
    auto g = build_adjacency(edges, n, rels);
    auto dfs = oracle::enumerate_paths(edges, 3);
    auto counts = oracle::relation_counts(edges);

    auto base = JoinTable::single_hop(g);
    auto two = extend_join(base, base);
    auto three = extend_join(two, base);
    std::size_t seen = 0;
    for (const auto* table : {&base, &two, &three}) {
      for (const auto& grp : table->groups()) {
        const auto it = dfs.find(grp.metapath);
        REQUIRE(it != dfs.end());
        CHECK(grp.rows() == it->second.instances);
        for (std::size_t hop = 0; hop < grp.metapath.length(); ++hop) {
          const auto a = compute_association(*table, grp, hop, 1.0, 0);
          CHECK(a->edges_covered == it->second.covered[hop].size());
        }
        // Every row is a real path following the key.
        for (std::size_t i = grp.begin; i < grp.end; ++i) {
          const auto row = table->row(i);
          for (std::size_t k = 0; k < row.size(); ++k) {
            CHECK(g.edge(row[k]).relation == grp.metapath[k]);
            if (k > 0) CHECK(g.edge(row[k - 1]).tail == g.edge(row[k]).head);
          }
        }
        ++seen;
      }
    }
    CHECK(seen == dfs.size());

    auto mined = mine_informative_metapaths(g, all_paths(3));
    std::size_t expected = 0;
    for (const auto& [m, s] : dfs) {
      if (m.length() < 2) continue;
      ++expected;
      const auto it = mined.find(m);
      REQUIRE(it != mined.end());
      std::vector<double> hops;
      const double z = oracle::information(m, s, counts, &hops);
      CHECK(it->second.z == doctest::Approx(z).epsilon(1e-12));
      for (std::size_t k = 0; k < hops.size(); ++k) CHECK(it->second.per_hop[k].association == hops[k]);
    }
    CHECK(mined.size() == expected);
  }
}

TEST_CASE("information is anti-monotone along prefixes") {
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    auto edges = oracle::random_multigraph(rng, 10 + trial, 1 + trial % 4, 30 + 13 * trial);
    auto g = build_adjacency(edges, 10 + trial);
    auto mined = mine_informative_metapaths(g, all_paths(3));
    for (const auto& [m, info] : mined) {
      CHECK(info.z >= 0.0);
      CHECK(info.z <= 1.0);
      double prod = 1.0;
      for (const auto& h : info.per_hop) {
        CHECK(h.edges_covered <= h.edges_total);
        prod *= h.association;
      }
      CHECK(info.z == prod);
      if (m.length() == 3) CHECK(info.z <= mined.at(m.prefix(2)).z);
    }
  }
}

TEST_CASE("thresholds select nested sets") {
  Rng rng(8);
  auto edges = oracle::random_multigraph(rng, 20, 3, 120);
  auto g = build_adjacency(edges, 20);
  MinerOptions loose = all_paths(3), strict = all_paths(3);
  loose.threshold = 0.1;
  strict.threshold = 0.2;
  auto a = mine_informative_metapaths(g, loose);
  auto b = mine_informative_metapaths(g, strict);
  CHECK(b.size() <= a.size());
  for (const auto& [m, info] : b) {
    CHECK(a.count(m) == 1);
    CHECK(info.z >= 0.2);
  }
  // Pruned metapaths of length 3 never reappear: their prefix was below the threshold.
  for (const auto& [m, info] : a) {
    if (m.length() == 3) CHECK(a.count(m.prefix(2)) == 1);
  }
  strict.threshold = 1.01;
  CHECK(mine_informative_metapaths(g, strict).empty());
}

TEST_CASE("worker count does not change the result") {
  Rng rng(31);
  auto edges = oracle::random_multigraph(rng, 40, 5, 400);
  auto g = build_adjacency(edges, 40);
  MinerOptions o = all_paths(3);
  o.threshold = 0.05;
  o.sample_probability = 0.7;
  o.seed = 4;
  auto one = mine_informative_metapaths(g, o);
  o.threads = 4;
  auto four = mine_informative_metapaths(g, o);
  REQUIRE(one.size() == four.size());
  for (const auto& [m, info] : one) CHECK(four.at(m).z == info.z);
}

TEST_CASE("row cap aborts mining") {
  auto g = build_adjacency({{0, 0, 1}, {1, 0, 2}, {2, 0, 3}, {3, 0, 0}}, 4);
  MinerOptions o = all_paths(3);
  o.max_rows = 3;
  CHECK_THROWS_AS(mine_informative_metapaths(g, o), MiningError);
}

TEST_CASE("option validation") {
  auto g = build_adjacency({{0, 0, 1}}, 2);
  MinerOptions o;
  o.max_length = 1;
  CHECK_THROWS_AS(mine_informative_metapaths(g, o), ConfigError);
  o = MinerOptions{};
  o.threshold = 0.0;
  CHECK_THROWS_AS(mine_informative_metapaths(g, o), ConfigError);
  o = MinerOptions{};
  o.sample_probability = 0.0;
  CHECK_THROWS_AS(mine_informative_metapaths(g, o), ConfigError);
  CHECK(mine_informative_metapaths(build_adjacency({}, 0), MinerOptions{}).empty());
}

TEST_CASE("metapath report format and round trip") {
  auto rels = std::make_shared<Dictionary>();
  for (auto n : {"b", "a", "c"}) rels->get_or_add(n);
  InformativeMap m;
  m[Metapath{0, 1}] = {Metapath{0, 1}, 0.5, {}, 3};
  m[Metapath{1, 0}] = {Metapath{1, 0}, 0.5, {}, 2};
  m[Metapath{2, 2}] = {Metapath{2, 2}, 0.75, {}, 9};
  std::ostringstream out;
  write_metapath_report(out, m, rels.get());
  CHECK(out.str() == "c|c\t0.75\t9\na|b\t0.5\t2\nb|a\t0.5\t3\n");

  testing::TempDir dir;
  auto path = dir.write("m.tsv", out.str());
  auto back = read_metapath_report(path, *rels);
  REQUIRE(back.size() == 3);
  CHECK(back.at(Metapath{2, 2}).z == 0.75);
  CHECK(back.at(Metapath{0, 1}).instance_count == 3);
  dir.write("bad.tsv", "a|b\t0.5\n");
  CHECK_THROWS_AS(read_metapath_report(dir.file("bad.tsv"), *rels), ParseError);
  dir.write("unknown.tsv", "a|zz\t0.5\t1\n");
  CHECK_THROWS_AS(read_metapath_report(dir.file("unknown.tsv"), *rels), LookupError);
}
