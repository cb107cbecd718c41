#include <cmath>
#include <sstream>

#include "doctest.h"
#include "horo/errors.hpp"
#include "horo/estimate.hpp"

using namespace horo;

namespace {

// Some vertex at height h: climb the spine on one side, descend via first
// children on the other.
ProductVertex at_height(const ProductEnv& envs, Height h) {
  if (h >= 0)
    return ProductVertex(TreeVertexAddr::spine(h), first_descendant(envs.tree_prime, TreeVertexAddr::root(), h));
  return ProductVertex(first_descendant(envs.tree, TreeVertexAddr::root(), -h), TreeVertexAddr::spine(-h));
}

}  // namespace

TEST_CASE("one-step drift estimator equals the kernel expectation") {
  auto envs = homogeneous_product(2, 3);
  const auto o = ProductVertex::origin();
  for (const auto& k : {Kernel::simple(), Kernel::height_biased(0.3), Kernel::move_weights(1.0, 4.0, 0.2)}) {
    Walker w(envs, k, o, 9);
    for (int i = 0; i < 300; ++i) {
      double direct = 0.0;
      for (const auto& [y, p] : step_distribution(envs, k, w.current())) {
        // Drift counts height gained, which is -B(X, Y).
        CHECK(height_cocycle(envs, w.current(), y) == w.current().height() - y.height());
        direct -= p * static_cast<double>(height_cocycle(envs, w.current(), y));
      }
      CHECK(std::abs(expected_height_increment(envs, k, w.current()) - direct) < 1e-12);
      w.step();
    }
  }
}

TEST_CASE("drift and speed on DL(2,3)") {
  auto envs = homogeneous_product(2, 3);
  const auto o = ProductVertex::origin();
  SimulationOptions opt;
  opt.n = 2000;
  opt.walks = 60;
  opt.seed = 11;
  const auto sim = simulate(envs, Kernel::simple(), o, opt);
  const auto d = drift_estimate(sim, envs, Kernel::simple(), o);
  CHECK(d.one_step_at_start == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(d.one_step == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(std::abs(d.trajectory - 0.2) < 0.02);
  const auto s = speed_estimate(sim);
  CHECK(s.mean >= 0.0);
  CHECK(std::abs(s.mean - std::abs(d.trajectory)) <= s.ci + d.ci + 0.01);
  REQUIRE(sim.series.size() == 20);
  CHECK(sim.series.back().n == opt.n);
}

TEST_CASE("biased kernel drift and the staying kernel") {
  auto envs = homogeneous_product(2, 2);
  const auto o = ProductVertex::origin();
  for (double u : {0.2, 0.7}) {
    const auto d = drift_estimate(envs, Kernel::height_biased(u), o, 500, 40, 3);
    CHECK(d.one_step_at_start == doctest::Approx(2 * u - 1).epsilon(1e-15));
    CHECK(std::abs(d.trajectory - (2 * u - 1)) < 0.05);
  }
  const auto still = speed_estimate(envs, Kernel::simple(1.0), o, 100, 5, 1);
  CHECK(still.mean == 0.0);
  CHECK(still.ci == 0.0);
}

TEST_CASE("simulation is deterministic in its seed") {
  auto envs = homogeneous_product(2, 3);
  SimulationOptions opt;
  opt.n = 300;
  opt.walks = 10;
  opt.seed = 5;
  const auto a = simulate(envs, Kernel::simple(), ProductVertex::origin(), opt);
  const auto b = simulate(envs, Kernel::simple(), ProductVertex::origin(), opt);
  for (std::size_t i = 0; i < a.walks.size(); ++i) {
    CHECK(a.walks[i].seed == walk_seed(5, i));
    CHECK(a.walks[i].final_height == b.walks[i].final_height);
    CHECK(a.walks[i].final_distance == b.walks[i].final_distance);
  }
  CHECK_THROWS_AS(simulate(envs, Kernel::simple(), ProductVertex::origin(), SimulationOptions{0}),
                  std::invalid_argument);
}

TEST_CASE("entropy sequences") {
  auto dl22 = homogeneous_product(2, 2);
  auto dl23 = homogeneous_product(2, 3);
  const auto o = ProductVertex::origin();
  auto h = entropy_sequence(dl22, Kernel::simple(), o, 9);
  REQUIRE(h.size() == 10);
  CHECK(h[0] == 0.0);
  CHECK(h[1] == doctest::Approx(std::log(4.0)).epsilon(1e-14));
  CHECK(increments_nonincreasing(h));
  for (double x : h) CHECK(x >= 0.0);
  const auto inc = increments(h);
  for (std::size_t n = 0; n < inc.size(); ++n) CHECK(inc[n] == h[n + 1] - h[n]);

  auto h23 = entropy_sequence(dl23, Kernel::simple(), o, 3);
  CHECK(h23[1] == doctest::Approx(std::log(5.0)).epsilon(1e-14));
  CHECK(h23 == entropy_sequence(dl23, Kernel::simple(), o, 3));

  // Deterministic ascent: each step picks one of q children in T' uniformly.
  auto up = entropy_sequence(dl23, Kernel::height_biased(1.0), o, 8);
  for (std::size_t n = 0; n < up.size(); ++n)
    CHECK(up[n] == doctest::Approx(static_cast<double>(n) * std::log(3.0)).epsilon(1e-12));

  CHECK_THROWS_AS(entropy_sequence(dl23, Kernel::simple(), o, 10, 100), BudgetExceeded);
}

TEST_CASE("entropy averaged over random environments") {
  std::vector<ProductEnv> envs;
  for (std::uint64_t s = 1; s <= 4; ++s)
    envs.push_back({PointedTreeEnv::galton_watson({0.5, 0.5}, s), PointedTreeEnv::galton_watson({0.5, 0.5}, 100 + s)});
  auto avg = entropy_sequence_over_environments(envs, Kernel::simple(), 5);
  CHECK(avg.environments == 4);
  REQUIRE(avg.mean.size() == 6);
  CHECK(avg.mean[0] == 0.0);
  CHECK(avg.spread[0] == 0.0);
  for (std::size_t n = 1; n <= 5; ++n) CHECK(avg.mean[n] > avg.mean[n - 1]);
}

TEST_CASE("asymptotic entropy estimators") {
  auto envs = homogeneous_product(2, 3);
  const auto e = asymptotic_entropy_estimate(envs, Kernel::height_biased(1.0), ProductVertex::origin(), 6, 50, 2);
  CHECK(e.last_increment == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(e.h_over_n == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(e.sampled.mean == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(e.agree);

  const auto s = asymptotic_entropy_estimate(envs, Kernel::simple(), ProductVertex::origin(), 6, 200, 2);
  CHECK(s.entropies.size() == 7);
  CHECK(s.last_increment == s.entropies[6] - s.entropies[5]);
  CHECK(s.sampled.mean > 0.0);
  CHECK(s.gap == std::abs(s.last_increment - s.sampled.mean));
}

TEST_CASE("regularity of an exact geodesic ray") {
  auto envs = homogeneous_product(2, 3);
  const auto o = ProductVertex::origin();
  const auto target = RayTarget::upper(TreeVertexAddr::root(), End(TreeVertexAddr::root(), {}));
  for (std::size_t len : {10u, 101u, 1000u}) {
    GeodesicRay ray(envs, o, target);
    const auto seq = ray.take(len - 1);
    const auto r = regularity_check(seq, 1.0, GeodesicRay(envs, o, target));
    REQUIRE(r.tracking);
    CHECK(*r.tracking == 0.0);
    CHECK(r.tree == 0.0);
    CHECK(r.height_residual < 1e-9);
    CHECK(r.drift_gap < 1e-9);
    // Consecutive vertices are adjacent, so the normalized jump is at most 1/(len/2).
    CHECK(r.jump <= 2.0 / static_cast<double>(len - 1) + 1e-15);
  }
  GeodesicRay ray(envs, o, target);
  const auto r = regularity_check(ray.take(999), 1.0);
  CHECK_FALSE(r.tracking);
  CHECK(r.tree == 0.0);
  CHECK(r.regular);
}

TEST_CASE("linearly oscillating heights violate the height condition") {
  auto envs = homogeneous_product(2, 2);
  std::vector<ProductVertex> seq;
  for (Height n = 0; n < 400; ++n) seq.push_back(at_height(envs, (n % 2 ? -n : n) / 2));
  for (double lambda : {0.0, 0.2, 0.5, 1.0}) {
    const auto r = regularity_check(seq, lambda);
    CHECK_FALSE(r.regular);
    CHECK(r.height_residual > 0.2);
  }
  CHECK_THROWS_AS(RegularityMonitor(1.5, 10), std::invalid_argument);
}

TEST_CASE("sampled walks on DL(2,3) are regular against their limit ray") {
  auto envs = homogeneous_product(2, 3);
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto w = walk_regularity(envs, Kernel::simple(), ProductVertex::origin(), 4000, seed, 0.2);
    CHECK(w.verdict.kind == LimitKind::upper);
    REQUIRE(w.report.tracking);
    CHECK(w.report.regular);
  }
}

TEST_CASE("boundary convergence statistics") {
  auto dl23 = homogeneous_product(2, 3);
  const auto o = ProductVertex::origin();
  const auto up = boundary_convergence_stats(dl23, Kernel::simple(), o, 2000, 40, 10, 7);
  CHECK(up.drift_sign == 1);
  CHECK(up.upper + up.lower + up.none == 40);
  CHECK(up.fraction(LimitKind::upper) >= 0.9);
  CHECK(up.match_fraction == up.fraction(LimitKind::upper));
  std::size_t hist = 0;
  for (const auto& [key, c] : up.histogram) {
    CHECK(key.rfind("upper:", 0) == 0);
    hist += c;
  }
  CHECK(hist == up.upper + up.lower);

  const auto low = boundary_convergence_stats(dl23, Kernel::height_biased(0.2), o, 2000, 40, 10, 7);
  CHECK(low.drift_sign == -1);
  CHECK(low.fraction(LimitKind::lower) > 0.5);

  auto dl22 = homogeneous_product(2, 2);
  const auto flat = boundary_convergence_stats(dl22, Kernel::simple(), o, 4000, 40, 10, 7);
  CHECK(flat.drift_sign == 0);
  CHECK(flat.fraction(LimitKind::upper) + flat.fraction(LimitKind::lower) < 0.5);
}

TEST_CASE("report writers") {
  auto envs = homogeneous_product(2, 3);
  const auto o = ProductVertex::origin();
  SimulationOptions opt;
  opt.n = 50;
  opt.walks = 4;
  opt.checkpoints = 5;
  const auto sim = simulate(envs, Kernel::simple(), o, opt);
  EstimateReport r;
  r.n = opt.n;
  r.walks = opt.walks;
  r.seed = opt.seed;
  r.drift = drift_estimate(sim, envs, Kernel::simple(), o);
  r.speed = speed_estimate(sim);
  r.boundary = boundary_convergence_stats(sim, envs, Kernel::simple(), o);
  r.series = sim.series;
  EntropyEstimate e;
  e.entropies = entropy_sequence(envs, Kernel::simple(), o, 3);
  r.entropy = e;

  std::ostringstream csv;
  write_series_csv(csv, r);
  std::istringstream lines(csv.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == "n,H_n,increment,speed_hat,drift_hat");
  std::vector<std::string> rows;
  while (std::getline(lines, line)) rows.push_back(line);
  // n = 0..3 from the DP plus checkpoints 10..50.
  REQUIRE(rows.size() == 9);
  CHECK(rows[0] == "0,0,,,");
  CHECK(rows[4].rfind("10,,,", 0) == 0);

  std::ostringstream text;
  write_text(text, r);
  CHECK(text.str().find("drift at start") != std::string::npos);
}
