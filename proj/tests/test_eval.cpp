#include "doctest.h"

#include <cmath>

#include <json.hpp>

#include "war/errors.hpp"
#include "war/eval.hpp"
#include "war/models.hpp"
#include "war/sharing.hpp"

using namespace war;

namespace {

// One-dimensional DistMult state: score(h, r, t) = x_h * x_t with r = 1.
EmbeddingState line_state(std::vector<double> xs) {
  EmbeddingState st(xs.size(), 1, 1, {}, 0);
  for (std::size_t i = 0; i < xs.size(); ++i) st.entities.at(i, 0) = xs[i];
  st.relations.at(0, 0) = 1.0;
  return st;
}

// Rank by scoring every corruption with score() and an increasing transform.
TripletRanks oracle_ranks(const Triplet& t, const EmbeddingState& st, Scoring s) {
  auto f = [&](EntityId h, EntityId tl) {
    const auto r = relation_representation(t.relation, st);
    return std::atan(score(st.entities.row(h), r, st.entities.row(tl), s));
  };
  TripletRanks out;
  const double pos = f(t.head, t.tail);
  for (EntityId e = 0; e < st.num_entities(); ++e) {
    if (e != t.tail && f(t.head, e) > pos) ++out.tail;
    if (e != t.head && f(e, t.tail) > pos) ++out.head;
  }
  return out;
}

}  // namespace

TEST_CASE("metrics from hand-computed rank sets") {
  auto r = compute_metrics({3, 1, 2});
  CHECK(r.mr == 2.0);
  CHECK(std::abs(r.mrr - 0.6111111111111112) <= 1e-12);
  CHECK(r.hits1 == doctest::Approx(1.0 / 3.0));
  CHECK(r.hits3 == 1.0);
  CHECK(r.q == 3);

  auto perfect = compute_metrics({1, 1, 1, 1});
  CHECK(perfect.mr == 1.0);
  CHECK(perfect.mrr == 1.0);
  CHECK(perfect.hits1 == 1.0);
  CHECK(perfect.hits10 == 1.0);

  auto ten = compute_metrics({10});
  CHECK(ten.hits10 == 1.0);
  CHECK(ten.hits3 == 0.0);
  CHECK(ten.mrr == 0.1);
  CHECK_THROWS_AS(compute_metrics({}), ConfigError);
}

TEST_CASE("hand-built ranking") {
  // Tail side of (0, r, 1): scores 0.2 * x = {0.04, 0.1, 0.4, 0.6}; two candidates win.
  auto st = line_state({0.2, 0.5, 2.0, 3.0});
  RankingOptions raw{Protocol::Raw, TiePolicy::Optimistic};
  auto r = rank_triplet({0, 0, 1}, st, Scoring::DistMult, nullptr, raw);
  CHECK(r.tail == 3);
  // Head side: 0.5 * x = {0.1, 0.25, 1, 1.5}; three candidates win.
  CHECK(r.head == 4);

  SUBCASE("filter removes known true corruptions only") {
    TripletFilter filter;
    filter.add({0, 0, 3});
    filter.add({0, 0, 1});
    filter.finalize();
    RankingOptions filt{Protocol::Filtered, TiePolicy::Optimistic};
    auto f = rank_triplet({0, 0, 1}, st, Scoring::DistMult, &filter, filt);
    CHECK(f.tail == 2);
    CHECK(f.head == 4);
    CHECK(rank_triplet({0, 0, 1}, st, Scoring::DistMult, &filter, raw).tail == 3);
  }
  SUBCASE("top score ranks first") {
    auto top = line_state({3.0, 2.0, 0.1, 0.2});
    auto t = rank_triplet({0, 0, 1}, top, Scoring::DistMult, nullptr, raw);
    CHECK(t.tail == 2);  // (0, r, 0) scores 9
    CHECK(t.head == 1);
  }
  SUBCASE("tie policy") {
    auto tie = line_state({1.0, 0.5, 0.5, 0.1});
    auto opt = rank_triplet({0, 0, 1}, tie, Scoring::DistMult, nullptr, raw);
    auto pes = rank_triplet({0, 0, 1}, tie, Scoring::DistMult, nullptr, {Protocol::Raw, TiePolicy::Pessimistic});
    CHECK(opt.tail == 2);
    CHECK(pes.tail == 3);
  }
}

TEST_CASE("ranks agree with an independent scorer and a monotone transform") {
  Rng rng(19);
  for (auto s : {Scoring::TransE_L1, Scoring::TransE_L2, Scoring::DistMult}) {
    for (int trial = 0; trial < 10; ++trial) {
      EmbeddingState st(30, 3, 5, {}, rng());
      std::uniform_int_distribution<EntityId> e(0, 29);
      std::uniform_int_distribution<RelationId> rl(0, 2);
      for (int k = 0; k < 20; ++k) {
        const Triplet t{e(rng), rl(rng), e(rng)};
        const auto got = rank_triplet(t, st, s, nullptr, {Protocol::Raw, TiePolicy::Optimistic});
        const auto want = oracle_ranks(t, st, s);
        CHECK(got.head == want.head);
        CHECK(got.tail == want.tail);
      }
    }
  }
}

TEST_CASE("ranks are unchanged by rescaling the state") {
  Rng rng(23);
  EmbeddingState st(40, 2, 6, {}, 3);
  auto doubled = st;
  for (double& v : doubled.entities.data()) v *= 2.0;
  for (double& v : doubled.relations.data()) v *= 2.0;
  for (auto s : {Scoring::TransE_L2, Scoring::DistMult}) {
    for (int k = 0; k < 50; ++k) {
      const Triplet t{static_cast<EntityId>(rng() % 40), static_cast<RelationId>(rng() % 2),
                      static_cast<EntityId>(rng() % 40)};
      const auto a = rank_triplet(t, st, s, nullptr, {});
      const auto b = rank_triplet(t, doubled, s, nullptr, {});
      CHECK(a.head == b.head);
      CHECK(a.tail == b.tail);
    }
  }
}

TEST_CASE("filtered rank never exceeds raw rank") {
  Rng rng(29);
  for (int trial = 0; trial < 100; ++trial) {
    EmbeddingState st(20, 2, 3, {}, rng());
    TripletFilter filter;
    for (int k = 0; k < 60; ++k) {
      filter.add({static_cast<EntityId>(rng() % 20), static_cast<RelationId>(rng() % 2),
                  static_cast<EntityId>(rng() % 20)});
    }
    filter.finalize();
    const Triplet t{static_cast<EntityId>(rng() % 20), static_cast<RelationId>(rng() % 2),
                    static_cast<EntityId>(rng() % 20)};
    const auto raw = rank_triplet(t, st, Scoring::TransE_L2, &filter, {Protocol::Raw, TiePolicy::Optimistic});
    const auto flt = rank_triplet(t, st, Scoring::TransE_L2, &filter, {Protocol::Filtered, TiePolicy::Optimistic});
    CHECK(flt.head <= raw.head);
    CHECK(flt.tail <= raw.tail);
    CHECK(flt.head >= 1);
  }
}

TEST_CASE("perfect toy state evaluates to all ones") {
  EmbeddingState st(3, 1, 2, {}, 0);
  const double e[3][2] = {{0, 0}, {1, 0}, {5, 5}};
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 2; ++k) st.entities.at(i, k) = e[i][k];
  }
  st.relations.at(0, 0) = 1.0;
  st.relations.at(0, 1) = 0.0;
  auto g = build_adjacency({{0, 0, 1}}, 3, 1);
  TripletFilter filter({&g});
  for (unsigned threads : {1u, 3u}) {
    auto res = evaluate(g, st, Scoring::TransE_L2, &filter, {}, 0, threads);
    CHECK(res.mrr == 1.0);
    CHECK(res.mr == 1.0);
    CHECK(res.hits1 == 1.0);
    CHECK(res.q == 2);
  }
  auto j = nlohmann::json::parse(metrics_json(compute_metrics({1, 2}, Protocol::Raw)));
  CHECK(j["mrr"] == 0.75);
  CHECK(j["mr"] == 1.5);
  CHECK(j["protocol"] == "raw");
  CHECK(j["q"] == 2);
  CHECK(j.contains("hits1"));
  CHECK(j.contains("hits3"));
  CHECK(j.contains("hits10"));
  CHECK(metrics_table(compute_metrics({1})).find("MRR") != std::string::npos);
}
