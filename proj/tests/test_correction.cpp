#include "doctest.h"

#include <cmath>
#include <limits>

#include "support/synthetic.hpp"
#include "war/correction.hpp"
#include "war/errors.hpp"
#include "war/miner.hpp"

using namespace war;

TEST_CASE("residual collapses at p = 1") {
  for (std::size_t len : {2u, 3u, 4u}) {
    for (double x : {1.0, 17.5, 80.0}) {
      CHECK(correction_residual(x, 1.0, len, 100.0, 42.0, 7.0) == doctest::Approx(100.0 - x - 7.0));
    }
  }
  const auto r = solve_correction(1.0, 3, 100.0, 55.0, 12.0, 88.0);
  CHECK(r.covered == 88.0);
  CHECK_FALSE(r.fallback);
}

TEST_CASE("residual without surviving instances") {
  // c = 0 makes the power term 1, so the residual is p N - zero_obs for every x.
  const double p = 0.3, n = 250.0, zero = 40.0;
  CHECK(correction_residual(n, p, 2, n, 0.0, zero) == doctest::Approx(p * n - zero));
  CHECK(correction_residual(3.0, p, 3, n, 0.0, zero) == doctest::Approx(p * n - zero));
}

TEST_CASE("residual is decreasing and finite near zero") {
  Rng rng(5);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int trial = 0; trial < 200; ++trial) {
    const double p = u(rng);
    const std::size_t len = 2 + trial % 3;
    const double n = 500.0, inst = 1.0 + 300.0 * u(rng), zero = 100.0 * u(rng);
    double prev = correction_residual(1e-300, p, len, n, inst, zero);
    CHECK(std::isfinite(prev));
    CHECK(prev == doctest::Approx(p * n - zero));
    for (double x = 1.0; x <= n; x += 7.0) {
      const double v = correction_residual(x, p, len, n, inst, zero);
      CHECK(v <= prev + 1e-9);
      prev = v;
    }
  }
}

TEST_CASE("root satisfies the tolerance") {
  // Inputs generated from a known x so a root exists inside the bracket.
  Rng rng(17);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  for (int trial = 0; trial < 100; ++trial) {
    const double p = u(rng);
    const std::size_t len = 2 + trial % 2;
    const double n = 1000.0, x_true = 100.0 + 800.0 * u(rng);
    const double inst = std::pow(p, static_cast<double>(len)) * x_true * (1.0 + 2.0 * u(rng));
    const double zero = correction_residual(x_true, p, len, n, inst, 0.0);
    const double observed = 0.5 * x_true * p;
    const auto r = solve_correction(p, len, n, inst, zero, observed);
    CHECK_FALSE(r.fallback);
    CHECK(std::abs(correction_residual(r.covered, p, len, n, inst, zero)) <= 1e-9);
    CHECK(r.covered == doctest::Approx(x_true).epsilon(1e-6));
    CHECK(r.covered >= observed);
    CHECK(r.covered <= n);
  }
}

TEST_CASE("no sign change falls back to the scaled count") {
  // zero_obs above p N makes the residual negative on the whole bracket.
  const auto r = solve_correction(0.5, 2, 100.0, 10.0, 80.0, 20.0);
  CHECK(r.fallback);
  CHECK(r.covered == 40.0);
}

TEST_CASE("nothing covered stays at the bracket floor") {
  const double p = 0.5, n = 1000.0, sampled = 497.0;
  const auto r = solve_correction(p, 2, n, 0.0, sampled, 0.0);
  CHECK(r.covered <= 1.0);
  CHECK(r.covered / n < 1e-2);
}

TEST_CASE("non-finite input raises a numeric error") {
  CHECK_THROWS_AS(solve_correction(0.5, 2, 100.0, std::numeric_limits<double>::quiet_NaN(), 3.0, 5.0),
                  NumericError);
}

TEST_CASE("residual at the true covered count changes sign in expectation") {
  // 1000 r0 edges, 600 with r1 continuations; average sampled inputs over 50 seeds.
  const auto edges = synthetic::coverage_graph(1000, 600, 5000, 1);
  const auto g = build_adjacency(edges, synthetic::coverage_graph_entities(1000, 600));
  const double p = 0.5;
  double inst = 0.0, zero = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto s = sample_edges(g, p, seed);
    const auto base = JoinTable::single_hop(s);
    const auto two = extend_join(base, base);
    for (const auto& grp : two.groups()) {
      if (grp.metapath != Metapath{0, 1}) continue;
      const auto a = compute_association(two, grp, 0, p, g.relation_counts()[0]);
      inst += static_cast<double>(grp.rows());
      zero += static_cast<double>(a->edges_total - a->edges_covered);
    }
  }
  inst /= 50.0;
  zero /= 50.0;
  const double n = 1000.0, x_star = 600.0;
  CHECK(correction_residual(0.85 * x_star, p, 2, n, inst, zero) > 0.0);
  CHECK(correction_residual(1.15 * x_star, p, 2, n, inst, zero) < 0.0);
}
