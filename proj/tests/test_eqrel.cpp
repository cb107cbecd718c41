#include <cmath>
#include <map>
#include <sstream>

#include "doctest.h"
#include "horo/eqrel.hpp"
#include "horo/errors.hpp"

using namespace horo;

namespace {

SquareMatrix matrix(std::initializer_list<std::initializer_list<double>> rows) {
  SquareMatrix m(rows.size());
  std::size_t i = 0;
  for (const auto& r : rows) {
    std::size_t j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

// Directed 3-cycle with a little laziness toward the reverse direction.
FiniteEqRel biased_cycle() {
  return FiniteEqRel({0, 0, 0}, {1, 1, 1}, matrix({{0, 0.8, 0.2}, {0.2, 0, 0.8}, {0.8, 0.2, 0}}));
}

// Oracle: entropy of the conditional law of (x_1..x_k) given (x_0, x_n), from
// the joint law of full paths generated step by step (no matrix powers).
double brute_conditional_entropy(const FiniteEqRel& rel, const Measure& lambda, std::size_t k, std::size_t n) {
  double total = 0.0;
  for (double v : lambda) total += v;
  const std::size_t N = rel.size();
  // Paths as vectors with probabilities, grown one step at a time.
  std::vector<std::pair<std::vector<std::size_t>, double>> paths;
  for (std::size_t x = 0; x < N; ++x)
    if (lambda[x] > 0) paths.push_back({{x}, lambda[x] / total});
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<std::pair<std::vector<std::size_t>, double>> next;
    for (const auto& [path, w] : paths)
      for (std::size_t y = 0; y < N; ++y)
        if (rel.p(path.back(), y) > 0) {
          auto q = path;
          q.push_back(y);
          next.push_back({q, w * rel.p(path.back(), y)});
        }
    paths = std::move(next);
  }
  std::map<std::vector<std::size_t>, double> joint;  // (x_0, x_1..x_k, x_n)
  std::map<std::pair<std::size_t, std::size_t>, double> ends;
  for (const auto& [path, w] : paths) {
    std::vector<std::size_t> key(path.begin(), path.begin() + static_cast<std::ptrdiff_t>(k) + 1);
    key.push_back(path.back());
    joint[key] += w;
    ends[{path.front(), path.back()}] += w;
  }
  double h = 0.0;
  for (const auto& [key, w] : joint) h -= w * std::log(w / ends.at({key.front(), key.back()}));
  return h;
}

}  // namespace

TEST_CASE("relation validation") {
  CHECK_THROWS_AS(FiniteEqRel({0, 0}, {1, 0}, matrix({{0, 1}, {1, 0}})), std::invalid_argument);
  CHECK_THROWS_AS(FiniteEqRel({0, 1}, {1, 1}, matrix({{0, 1}, {1, 0}})), std::invalid_argument);
  CHECK_THROWS_AS(FiniteEqRel({0, 0}, {1, 1}, matrix({{0.5, 0.4}, {1, 0}})), std::invalid_argument);
  CHECK_THROWS_AS(FiniteEqRel({0, 0}, {1, 1}, matrix({{0, 1}, {1, 0}}), {{0, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(FiniteEqRel({0, 0, 0}, {1, 1, 1}, SquareMatrix::identity(3), {{0, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(FiniteEqRel({0, 1}, {1, 1}, SquareMatrix::identity(2), {{0, 1}}), std::invalid_argument);

  FiniteEqRel r({7, 3, 7}, {1, 1, 1}, matrix({{0, 0, 1}, {0, 1, 0}, {1, 0, 0}}));
  CHECK(r.class_count() == 2);
  CHECK(r.equivalent(0, 2));
  CHECK_FALSE(r.equivalent(0, 1));
  CHECK(r.members(2) == std::vector<std::size_t>{0, 2});
}

TEST_CASE("Radon-Nikodym cocycle") {
  FiniteEqRel two({0, 0, 1}, {1, 2, 5}, matrix({{0, 1, 0}, {1, 0, 0}, {0, 0, 1}}));
  CHECK(radon_nikodym(two, 0, 0) == 1.0);
  CHECK(radon_nikodym(two, 0, 1) == 2.0);
  CHECK(radon_nikodym(two, 1, 0) == 0.5);
  CHECK_THROWS_AS(radon_nikodym(two, 0, 2), NotEquivalent);

  FiniteEqRel uniform({0, 0}, {3, 3}, matrix({{0, 1}, {1, 0}}));
  CHECK(radon_nikodym(uniform, 0, 1) == 1.0);

  for (std::uint64_t s = 0; s < 50; ++s) {
    auto rel = random_relation(s);
    for (std::size_t x = 0; x < rel.size(); ++x)
      for (auto y : rel.members(x))
        for (auto z : rel.members(x)) {
          const double d = radon_nikodym(rel, x, z);
          CHECK(std::abs(d - radon_nikodym(rel, x, y) * radon_nikodym(rel, y, z)) <= 1e-14 * d);
        }
  }
}

TEST_CASE("density formula matches the pushforward") {
  FiniteEqRel flip({0, 0}, {1, 1}, matrix({{0, 1}, {1, 0}}));
  auto img = apply_markov(flip, {1, 1});
  CHECK(img.pushforward == Measure{1, 1});
  CHECK(img.density == Measure{1, 1});

  for (std::uint64_t s = 0; s < 100; ++s) {
    auto rel = random_relation(s);
    const auto lambda = random_measure(s + 1000, rel.size());
    img = apply_markov(rel, lambda);
    for (std::size_t y = 0; y < rel.size(); ++y) {
      double direct = 0.0;
      for (std::size_t x = 0; x < rel.size(); ++x) direct += lambda[x] * rel.kernel()(x, y);
      CHECK(std::abs(img.density[y] * rel.mu()[y] - direct) <= 1e-12);
    }
    // Point mass: the image is the row of x.
    Measure delta(rel.size(), 0.0);
    delta[0] = 1.0;
    img = apply_markov(rel, delta);
    for (std::size_t y = 0; y < rel.size(); ++y) CHECK(std::abs(img.pushforward[y] - rel.p(0, y)) <= 1e-15);
  }
  CHECK_THROWS_AS(apply_markov(flip, {1, -1}), std::invalid_argument);
}

TEST_CASE("leafwise measures are proportional within a class") {
  auto rel = random_relation(17);
  const auto lambda = random_measure(3, rel.size());
  for (std::size_t x = 0; x < rel.size(); ++x)
    for (auto y : rel.members(x)) {
      const auto a = leafwise_measure(rel, lambda, x);
      const auto b = leafwise_measure(rel, lambda, y);
      REQUIRE(a.points == b.points);
      const double ratio = b.weights[0] / a.weights[0];
      for (std::size_t i = 0; i < a.points.size(); ++i)
        CHECK(b.weights[i] == doctest::Approx(ratio * a.weights[i]).epsilon(1e-14));
      CHECK(a.weights[std::find(a.points.begin(), a.points.end(), x) - a.points.begin()] ==
            doctest::Approx(lambda[x] / rel.mu()[x]).epsilon(1e-15));
    }
}

TEST_CASE("stationarity verdicts") {
  FiniteEqRel doubly({0, 0, 0}, {1, 2, 3}, matrix({{0.2, 0.3, 0.5}, {0.5, 0.2, 0.3}, {0.3, 0.5, 0.2}}));
  auto r = stationarity_check(doubly, {1, 1, 1});
  CHECK(r.global);
  CHECK(r.leafwise);
  CHECK(r.global_residual < 1e-15);

  std::size_t stationary = 0, not_stationary = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    auto rel = random_relation(s);
    auto generic = stationarity_check(rel, Measure(rel.size(), 1.0));
    CHECK(generic.agree);
    if (!generic.global) {
      CHECK(generic.global_residual > 0.0);
      ++not_stationary;
    }
    auto st = stationarity_check(rel, stationary_measure(rel));
    CHECK(st.global);
    CHECK(st.leafwise);
    stationary += st.global;
  }
  CHECK(stationary == 100);
  CHECK(not_stationary > 50);
}

TEST_CASE("degree times mu is stationary for the simple walk") {
  for (std::uint64_t s = 0; s < 50; ++s) {
    auto rel = random_graphed_relation(s);
    const auto lambda = degree_measure(rel);
    auto r = stationarity_check(rel, lambda, 1e-14);
    CHECK(r.global);
    CHECK(r.leafwise);
    double lp_err = 0.0;
    for (std::size_t y = 0; y < rel.size(); ++y) {
      double lp = 0.0;
      for (std::size_t x = 0; x < rel.size(); ++x) lp += lambda[x] * rel.p(x, y);
      lp_err = std::max(lp_err, std::abs(lp - lambda[y]) / lambda[y]);
    }
    CHECK(lp_err <= 1e-14);
    CHECK(reversibility_check(rel, lambda).reversible);
  }
}

TEST_CASE("cotransition and reversibility") {
  FiniteEqRel sym({0, 0, 0}, {1, 1, 1}, matrix({{0.5, 0.25, 0.25}, {0.25, 0.5, 0.25}, {0.25, 0.25, 0.5}}));
  CHECK(cotransition(sym, {1, 1, 1}) == sym.kernel());
  CHECK(reversibility_check(sym, {1, 1, 1}).reversible);

  auto cyc = biased_cycle();
  const auto c = cotransition(cyc, {1, 1, 1});
  for (std::size_t x = 0; x < 3; ++x)
    for (std::size_t y = 0; y < 3; ++y) CHECK(c(x, y) == doctest::Approx(cyc.p(y, x)).epsilon(1e-15));
  auto rev = reversibility_check(cyc, {1, 1, 1});
  CHECK_FALSE(rev.reversible);
  CHECK(rev.max_violation == doctest::Approx(0.6));

  FiniteEqRel directed({0, 0, 0}, {1, 1, 1}, matrix({{0, 1, 0}, {0, 0, 1}, {1, 0, 0}}));
  CHECK_FALSE(reversibility_check(directed, {1, 1, 1}).reversible);

  CHECK_THROWS_AS(cotransition(cyc, {1, 2, 1}), NotStationary);
  CHECK_THROWS_AS(cotransition(cyc, {0, 0, 0}), std::invalid_argument);

  for (std::uint64_t s = 0; s < 100; ++s) {
    auto rel = random_relation(s);
    const auto lambda = stationary_measure(rel);
    const auto ch = cotransition(rel, lambda);
    for (std::size_t y = 0; y < rel.size(); ++y) {
      double row = 0.0;
      for (std::size_t x = 0; x < rel.size(); ++x) row += ch(y, x);
      CHECK(std::abs(row - 1.0) <= 1e-12);
    }
    // lambda is stationary for the time reversal too.
    for (std::size_t x = 0; x < rel.size(); ++x) {
      double lp = 0.0;
      for (std::size_t y = 0; y < rel.size(); ++y) lp += lambda[y] * ch(y, x);
      CHECK(lp == doctest::Approx(lambda[x]).epsilon(1e-12));
    }
    CHECK(reversibility_check(rel, lambda).detailed_balance <= 1e-12);
  }
}

TEST_CASE("antisymmetric cocycles average to zero for reversible walks") {
  for (std::uint64_t s = 0; s < 50; ++s) {
    auto rel = random_graphed_relation(s);
    auto lambda = degree_measure(rel);
    double total = 0.0;
    for (double v : lambda) total += v;
    for (double& v : lambda) v /= total;
    const auto c = random_antisymmetric(s, rel);
    CHECK(std::abs(cocycle_expectation(rel, lambda, c)) <= 1e-12);
  }
  auto cyc = biased_cycle();
  SquareMatrix c(3);
  c(0, 1) = c(1, 2) = c(2, 0) = 1;
  c(1, 0) = c(2, 1) = c(0, 2) = -1;
  CHECK(cocycle_expectation(cyc, {1.0 / 3, 1.0 / 3, 1.0 / 3}, c) == doctest::Approx(0.6));
}

TEST_CASE("conditional entropy identity") {
  // Two-state chain.
  FiniteEqRel two({0, 0}, {1, 1}, matrix({{0.3, 0.7}, {0.6, 0.4}}));
  const auto st2 = stationary_measure(two);
  auto id = conditional_entropy_identity(two, st2, 1, 2);
  CHECK(id.diff <= 1e-10);
  CHECK(id.lhs == doctest::Approx(brute_conditional_entropy(two, st2, 1, 2)).epsilon(1e-12));
  CHECK(id.paths == 8);

  // k = n: H(alpha_1^n | alpha_0 v alpha_n) = n H_1 - H_n.
  const auto H = average_entropies(two, st2, 3);
  CHECK(H[0] == 0.0);
  id = conditional_entropy_identity(two, st2, 3, 3);
  CHECK(id.rhs == doctest::Approx(3 * H[1] - H[3]).epsilon(1e-15));
  CHECK(id.diff <= 1e-10);

  for (std::uint64_t s = 0; s < 20; ++s) {
    auto rel = random_relation(s, 4);
    const auto lambda = stationary_measure(rel);
    std::vector<double> k1;
    for (std::size_t n = 1; n <= 4; ++n)
      for (std::size_t k = 1; k <= n; ++k) {
        id = conditional_entropy_identity(rel, lambda, k, n);
        CHECK(id.diff <= 1e-10);
        if (n <= 3) CHECK(id.lhs == doctest::Approx(brute_conditional_entropy(rel, lambda, k, n)).epsilon(1e-10));
        if (k == 1) k1.push_back(id.lhs);
      }
    for (std::size_t i = 0; i + 1 < k1.size(); ++i) CHECK(k1[i + 1] >= k1[i] - 1e-10);
  }

  auto rel = random_relation(5);
  CHECK_THROWS_AS(conditional_entropy_identity(rel, stationary_measure(rel), 1, 12, 1000), BudgetExceeded);
  CHECK_THROWS_AS(conditional_entropy_identity(biased_cycle(), {1, 2, 3}, 1, 2), NotStationary);
  CHECK_THROWS_AS(conditional_entropy_identity(two, st2, 3, 2), std::invalid_argument);
}

TEST_CASE("phi diagnostic") {
  FiniteEqRel flip({0, 0}, {1, 1}, matrix({{0, 1}, {1, 0}}));
  for (double v : phi_diagnostic(flip, 3)) CHECK(v == 2.0);
  FiniteEqRel lazy({0, 0}, {1, 1}, matrix({{0.5, 0.5}, {0.5, 0.5}}));
  for (double v : phi_diagnostic(lazy, 1)) CHECK(v == 0.0);
  for (double v : phi_diagnostic(random_relation(8), 2)) {
    CHECK(v >= 0.0);
    CHECK(v <= 2.0 + 1e-12);
  }
}

TEST_CASE("relation files") {
  auto rel = random_graphed_relation(12);
  const auto lambda = degree_measure(rel);
  std::stringstream ss;
  write_relation(ss, rel, &lambda);
  const auto back = read_relation(ss);
  CHECK(back.relation.kernel() == rel.kernel());
  CHECK(back.relation.mu() == rel.mu());
  CHECK(back.relation.edges() == rel.edges());
  REQUIRE(back.lambda);
  CHECK(*back.lambda == lambda);

  std::istringstream simple("points 3\nclasses 0 0 0\nmu 1 1 1\nkernel simple\nedge 0 1\nedge 1 2\n");
  const auto s = read_relation(simple);
  CHECK(s.relation.p(1, 0) == 0.5);
  CHECK(s.relation.p(0, 1) == 1.0);
  CHECK_FALSE(s.lambda);

  auto error_of = [](const std::string& text) {
    std::istringstream in(text);
    try {
      read_relation(in, "f");
    } catch (const ParseError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(error_of("classes 0\n") == "f:1: 'points' must come first");
  CHECK(error_of("points 2\nclasses 0 0\nmu 1 x\n") == "f:3: expected a number, got 'x'");
  CHECK(error_of("points 2\nclasses 0 0\nmu 1 1\n# c\nrow 0 0.5 0.4\nrow 1 1 0\n") == "f:5: row sums to 0.900000, not 1");
  CHECK(error_of("points 2\nclasses 0 1\nmu 1 1\nrow 0 0 1\nrow 1 0 1\n") == "f:4: p(0,1) leaves the class");
  CHECK(error_of("points 2\nclasses 0 0\nmu 1 1\nrow 0 0 1\n") == "f: missing row 1");
  CHECK(error_of("points 2\nfoo\n") == "f:2: unknown keyword 'foo'");
  CHECK(error_of("points 3\nclasses 0 0 1\nmu 1 1 1\nedge 0 2\n") == "f:4: edge crosses classes");
  CHECK(error_of("points 2\nclasses 0 0\nmu 1 1 1\n") == "f:3: mu needs 2 values, got 3");
}

TEST_CASE("the bundled sample relation passes the battery") {
  const auto file = load_relation(HORO_SOURCE_DIR "/configs/sample.rel");
  const auto v = verify_relation(file.relation, file.lambda, 1);
  CHECK(v.points == 5);
  CHECK(v.classes == 2);
  CHECK(v.passed);
  CHECK_FALSE(v.degree);  // mu is not invariant on the first class
  REQUIRE(v.phi.size() == 4);
  CHECK(v.phi[0] == doctest::Approx(2.0));  // the periodic class
  CHECK(v.identities.size() == 10);

  CHECK_THROWS_AS(load_relation("/nonexistent.rel"), ParseError);
}

TEST_CASE("random relations pass the battery") {
  for (std::uint64_t s = 0; s < 100; ++s) CHECK(verify_relation(random_relation(s), std::nullopt, s).passed);
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto v = verify_relation(random_graphed_relation(s), std::nullopt, s);
    CHECK(v.passed);
    REQUIRE(v.degree);
    CHECK(v.reversibility.reversible);
  }
}
