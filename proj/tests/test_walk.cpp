#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "doctest.h"
#include "horo/errors.hpp"
#include "horo/walk.hpp"

using namespace horo;

namespace {

ProductEnv gw_product() {
  return {PointedTreeEnv::galton_watson({1.0 / 3, 1.0 / 3, 1.0 / 3}, 42),
          PointedTreeEnv::galton_watson({1.0 / 3, 1.0 / 3, 1.0 / 3}, 43)};
}

double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
  double tv = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) tv += std::abs(a[i] - b[i]);
  return tv / 2.0;
}

}  // namespace

TEST_CASE("step distribution of the simple and biased kernels") {
  auto envs = homogeneous_product(2, 3);
  const auto o = ProductVertex::origin();
  auto simple = step_distribution(envs, Kernel::simple(), o);
  REQUIRE(simple.size() == 5);
  for (const auto& [v, p] : simple) CHECK(p == doctest::Approx(0.2).epsilon(1e-15));

  auto biased = step_distribution(envs, Kernel::height_biased(0.5), o);
  REQUIRE(biased.size() == 5);
  for (const auto& [v, p] : biased) {
    if (v.height() > 0) CHECK(p == doctest::Approx(0.5 / 3).epsilon(1e-15));
    else CHECK(p == doctest::Approx(0.25).epsilon(1e-15));
  }
}

TEST_CASE("one-step distributions are normalized") {
  auto envs = gw_product();
  const auto custom = Kernel::custom([](const ProductVertex& v, Move m) {
    return 1.0 + static_cast<double>(m.index) + (m.kind == Move::Kind::up ? 0.5 : 0.0) +
           static_cast<double>(v.height() & 1);
  });
  SplitMix64 rng(3);
  Walker w(envs, Kernel::simple(), ProductVertex::origin(), 1);
  for (int i = 0; i < 1000; ++i) {
    w.step();
    for (const auto& k : {Kernel::simple(), Kernel::height_biased(0.3), Kernel::simple(0.25), custom,
                          Kernel::move_weights(1.0, 2.0)}) {
      double s = 0.0;
      for (const auto& [v, p] : step_distribution(envs, k, w.current())) {
        CHECK(p >= 0.0);
        s += p;
      }
      CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("degenerate custom weights are rejected") {
  auto envs = homogeneous_product(2, 2);
  auto zero = Kernel::move_weights(0.0, 0.0);
  CHECK_THROWS_AS(step_distribution(envs, zero, ProductVertex::origin()), DegenerateKernel);
  auto negative = Kernel::custom([](const ProductVertex&, Move) { return -1.0; });
  CHECK_THROWS_AS(step_distribution(envs, negative, ProductVertex::origin()), DegenerateKernel);
  CHECK_THROWS_AS(Kernel::height_biased(1.5), std::invalid_argument);
}

TEST_CASE("one-step height expectation on DL(p,q)") {
  for (auto [p, q] : {std::pair{2u, 2u}, std::pair{2u, 3u}, std::pair{3u, 2u}, std::pair{1u, 4u}}) {
    auto envs = homogeneous_product(p, q);
    const double expected = (double(q) - double(p)) / double(p + q);
    CHECK(std::abs(expected_height_increment(envs, Kernel::simple(), ProductVertex::origin()) - expected) < 1e-15);
  }
  auto envs = homogeneous_product(2, 3);
  for (double u : {0.0, 0.2, 0.5, 1.0})
    CHECK(expected_height_increment(envs, Kernel::height_biased(u), ProductVertex::origin()) ==
          doctest::Approx(2 * u - 1).epsilon(1e-15));
}

TEST_CASE("sample paths") {
  auto envs = gw_product();
  const auto o = ProductVertex::origin();
  auto empty = sample_path(envs, Kernel::simple(), o, 0, 5);
  CHECK(empty.vertices(envs) == std::vector<ProductVertex>{o});
  auto a = sample_path(envs, Kernel::simple(), o, 500, 5);
  auto b = sample_path(envs, Kernel::simple(), o, 500, 5);
  auto c = sample_path(envs, Kernel::simple(), o, 500, 6);
  CHECK(a.moves == b.moves);
  CHECK(a.moves != c.moves);
  auto vs = a.vertices(envs);
  CHECK(vs.size() == 501);
  CHECK(is_path(envs, vs));
  CHECK(a.end(envs) == vs.back());

  auto still = sample_path(envs, Kernel::simple(1.0), o, 100, 5);
  CHECK(still.end(envs) == o);
}

TEST_CASE("sampled steps follow the one-step law") {
  auto envs = homogeneous_product(2, 3);
  for (const auto& k : {Kernel::simple(), Kernel::height_biased(0.2), Kernel::move_weights(3.0, 1.0, 0.1)}) {
    std::vector<double> freq(6, 0.0);
    Walker w(envs, k, ProductVertex::origin(), 77);
    const int n = 1'000'000;
    for (int i = 0; i < n; ++i) {
      const auto idx = w.step();
      freq[idx < 0 ? 5 : idx] += 1.0 / n;
    }
    std::vector<double> exact(6, 0.0);
    auto law = step_distribution(envs, k, ProductVertex::origin());
    for (std::size_t i = 0; i < 5; ++i) exact[i] = law[i].second;
    if (law.size() == 6) exact[5] = law[5].second;
    CHECK(total_variation(freq, exact) < 0.01);
  }
}

TEST_CASE("custom kernel sampling at a fixed vertex") {
  auto envs = gw_product();
  auto k = Kernel::custom([](const ProductVertex&, Move m) { return m.kind == Move::Kind::up ? 2.0 + m.index : 1.0; });
  const auto o = ProductVertex::origin();
  const ChildIndex down = envs.tree.offspring(o.x());
  const ChildIndex up = envs.tree_prime.offspring(o.x_prime());
  std::vector<double> exact;
  k.move_probabilities(down, up, &o, exact);
  std::vector<double> freq(exact.size(), 0.0);
  SplitMix64 rng(4);
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) freq[k.sample(down, up, o, rng)] += 1.0 / n;
  CHECK(total_variation(freq, exact) < 0.01);
}

TEST_CASE("n-step distributions") {
  auto envs = homogeneous_product(2, 2);
  const auto o = ProductVertex::origin();
  NStepDistribution dp(envs, Kernel::simple(), o);
  dp.extend_to(6);
  CHECK(dp.support(0) == 1);
  CHECK(dp.probability(0, o) == 1.0);
  CHECK(dp.probability(2, o) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(dp.entropy(0) == 0.0);
  CHECK(dp.entropy(1) == doctest::Approx(std::log(4.0)).epsilon(1e-14));
  for (std::size_t n = 0; n <= 6; ++n) CHECK(std::abs(dp.total(n) - 1.0) < 1e-10);
  auto one = step_distribution(envs, Kernel::simple(), o);
  for (const auto& [v, p] : one) CHECK(dp.probability(1, v) == doctest::Approx(p).epsilon(1e-15));
  CHECK(dp.distribution(1).size() == one.size());

  NStepDistribution small(envs, Kernel::simple(), o, 50);
  CHECK_THROWS_AS(small.extend_to(8), BudgetExceeded);
}

TEST_CASE("n-step distributions are reproducible") {
  auto envs = homogeneous_product(2, 3);
  NStepDistribution a(envs, Kernel::simple(), ProductVertex::origin());
  NStepDistribution b(envs, Kernel::simple(), ProductVertex::origin());
  a.extend_to(7);
  b.extend_to(7);
  for (std::size_t n = 0; n <= 7; ++n) {
    CHECK(a.level(n) == b.level(n));
    CHECK(a.entropy(n) == b.entropy(n));
  }
}

TEST_CASE("Chapman-Kolmogorov on DL(2,2)") {
  auto envs = homogeneous_product(2, 2);
  const auto o = ProductVertex::origin();
  NStepDistribution from_o(envs, Kernel::simple(), o);
  from_o.extend_to(8);
  std::map<ProductVertex, NStepDistribution> from;
  for (std::size_t m = 1; m <= 4; ++m) {
    for (const auto& [z, pz] : from_o.distribution(m)) {
      if (!from.contains(z)) {
        auto [it, _] = from.emplace(z, NStepDistribution(envs, Kernel::simple(), z));
        it->second.extend_to(4);
      }
    }
  }
  for (std::size_t m = 1; m <= 4; ++m) {
    for (std::size_t n = 1; n <= 4; ++n) {
      double worst = 0.0;
      for (const auto& [y, py] : from_o.distribution(m + n)) {
        double s = 0.0;
        for (const auto& [z, pz] : from_o.distribution(m)) s += pz * from.at(z).probability(n, y);
        worst = std::max(worst, std::abs(s - py));
      }
      CHECK(worst < 1e-9);
    }
  }
}

TEST_CASE("homesick projection kernel") {
  auto line = PointedTreeEnv::homogeneous(1);
  auto k1 = homesick_projection_kernel(line, 1);
  CHECK(k1.parent_probability(TreeVertexAddr::root()) == 0.5);
  CHECK(k1.child_probability(TreeVertexAddr::root()) == 0.5);

  auto t = PointedTreeEnv::homogeneous(2);
  auto k = homesick_projection_kernel(t, 3);
  auto law = k.distribution(TreeVertexAddr::root());
  REQUIRE(law.size() == 3);
  CHECK(law[0].first == TreeVertexAddr::spine(1));
  CHECK(law[0].second == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(law[1].second == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(law[2].second == doctest::Approx(0.2).epsilon(1e-15));

  auto gw = PointedTreeEnv::galton_watson({0.5, 0.5}, 5);
  auto kg = homesick_projection_kernel(gw, 2);
  double s = 0.0;
  for (const auto& [v, p] : kg.distribution(TreeVertexAddr::root())) s += p;
  CHECK(s == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("projected product steps follow the homesick law") {
  ProductEnv envs{PointedTreeEnv::homogeneous(2), PointedTreeEnv::homogeneous(3)};
  Walker w(envs, Kernel::simple(), ProductVertex::origin(), 123);
  std::vector<double> freq(3, 0.0);
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) {
    const auto before = w.current().x();
    w.step();
    const auto& after = w.current().x();
    if (after.height() > before.height()) freq[0] += 1.0 / n;
    else freq[1 + envs.tree.index_in_parent(after)] += 1.0 / n;
  }
  CHECK(total_variation(freq, {0.6, 0.2, 0.2}) < 0.01);
}

TEST_CASE("path and distribution CSV") {
  const auto envs = homogeneous_product(2, 3);
  const auto path = sample_path(envs, Kernel::simple(), ProductVertex::origin(), 3, 9);
  std::ostringstream csv;
  write_path_csv(csv, envs, path);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "step,height,distance_from_start,vertex");
  std::getline(in, line);
  CHECK(line == "0,0,0,\"(0:[]|0:[])\"");
  const auto vs = path.vertices(envs);
  for (std::size_t i = 1; i < vs.size(); ++i) {
    std::getline(in, line);
    CHECK(line == std::to_string(i) + ',' + std::to_string(vs[i].height()) + ',' +
                      std::to_string(product_distance(vs[0], vs[i])) + ",\"" + to_string(vs[i]) + '"');
  }
  CHECK_FALSE(std::getline(in, line));

  NStepDistribution dp(homogeneous_product(2, 2), Kernel::simple(), ProductVertex::origin());
  dp.extend_to(1);
  std::ostringstream law;
  write_distribution_csv(law, dp.distribution(1));
  const auto text = law.str();
  CHECK(text.rfind("vertex,prob\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 5);
  CHECK(text.find(",0.25\n") != std::string::npos);
}
