#include "horo/eqrel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "horo/errors.hpp"
#include "horo/random.hpp"

namespace horo {

SquareMatrix SquareMatrix::operator*(const SquareMatrix& b) const {
  if (b.n_ != n_) throw std::invalid_argument("matrix sizes differ");
  SquareMatrix c(n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t k = 0; k < n_; ++k) {
      const double a = (*this)(i, k);
      if (a == 0.0) continue;
      for (std::size_t j = 0; j < n_; ++j) c(i, j) += a * b(k, j);
    }
  return c;
}

SquareMatrix SquareMatrix::identity(std::size_t n) {
  SquareMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

FiniteEqRel::FiniteEqRel(std::vector<std::size_t> class_labels, Measure mu, SquareMatrix p, std::vector<Edge> edges)
    : mu_(std::move(mu)), p_(std::move(p)) {
  const std::size_t n = class_labels.size();
  if (n == 0) throw std::invalid_argument("relation has no points");
  if (mu_.size() != n || p_.size() != n) throw std::invalid_argument("classes, mu and kernel sizes differ");

  std::map<std::size_t, std::size_t> ids;
  class_.resize(n);
  for (std::size_t x = 0; x < n; ++x) {
    auto [it, fresh] = ids.emplace(class_labels[x], members_.size());
    if (fresh) members_.emplace_back();
    class_[x] = it->second;
    members_[it->second].push_back(x);
  }

  for (std::size_t x = 0; x < n; ++x)
    if (!(mu_[x] > 0.0) || !std::isfinite(mu_[x]))
      throw std::invalid_argument("mu(" + std::to_string(x) + ") must be positive and finite");

  for (std::size_t x = 0; x < n; ++x) {
    double s = 0.0;
    for (std::size_t y = 0; y < n; ++y) {
      const double v = p_(x, y);
      if (!(v >= 0.0) || !std::isfinite(v))
        throw std::invalid_argument("p(" + std::to_string(x) + "," + std::to_string(y) + ") must be nonnegative");
      if (v > 0.0 && class_[x] != class_[y])
        throw std::invalid_argument("p(" + std::to_string(x) + "," + std::to_string(y) + ") leaves the class");
      s += v;
    }
    if (std::abs(s - 1.0) > 1e-12) throw std::invalid_argument("row " + std::to_string(x) + " does not sum to 1");
  }

  degree_.assign(n, 0);
  for (auto [a, b] : edges) {
    if (a >= n || b >= n) throw std::invalid_argument("edge endpoint out of range");
    if (a == b) throw std::invalid_argument("edge " + std::to_string(a) + " is a loop");
    if (class_[a] != class_[b])
      throw std::invalid_argument("edge " + std::to_string(a) + "-" + std::to_string(b) + " crosses classes");
    edges_.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  for (auto [a, b] : edges_) {
    ++degree_[a];
    ++degree_[b];
  }

  if (!edges_.empty()) {
    std::vector<std::vector<std::size_t>> adj(n);
    for (auto [a, b] : edges_) {
      adj[a].push_back(b);
      adj[b].push_back(a);
    }
    for (const auto& cls : members_) {
      std::vector<bool> seen(n, false);
      std::vector<std::size_t> stack{cls.front()};
      seen[cls.front()] = true;
      std::size_t reached = 0;
      while (!stack.empty()) {
        const auto v = stack.back();
        stack.pop_back();
        ++reached;
        for (auto w : adj[v])
          if (!seen[w]) {
            seen[w] = true;
            stack.push_back(w);
          }
      }
      if (reached != cls.size())
        throw std::invalid_argument("class of point " + std::to_string(cls.front()) + " is not connected");
    }
  }
}

FiniteEqRel FiniteEqRel::simple_walk(std::vector<std::size_t> class_labels, Measure mu, std::vector<Edge> edges) {
  const std::size_t n = class_labels.size();
  std::vector<std::vector<std::size_t>> adj(n);
  for (auto [a, b] : edges) {
    if (a >= n || b >= n) throw std::invalid_argument("edge endpoint out of range");
    if (a == b) continue;  // rejected by the constructor
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  SquareMatrix p(n);
  for (std::size_t x = 0; x < n; ++x) {
    std::sort(adj[x].begin(), adj[x].end());
    adj[x].erase(std::unique(adj[x].begin(), adj[x].end()), adj[x].end());
    if (adj[x].empty()) throw std::invalid_argument("point " + std::to_string(x) + " has no edges");
    for (auto y : adj[x]) p(x, y) = 1.0 / static_cast<double>(adj[x].size());
  }
  return FiniteEqRel(std::move(class_labels), std::move(mu), std::move(p), std::move(edges));
}

double radon_nikodym(const FiniteEqRel& rel, std::size_t x, std::size_t y) {
  if (!rel.equivalent(x, y))
    throw NotEquivalent("points " + std::to_string(x) + " and " + std::to_string(y) + " are not equivalent");
  return rel.mu()[y] / rel.mu()[x];
}

namespace {

void check_measure(const FiniteEqRel& rel, const Measure& lambda) {
  if (lambda.size() != rel.size()) throw std::invalid_argument("measure size differs from the relation");
  for (double v : lambda)
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("measure weights must be nonnegative");
}

double mass(const Measure& m) {
  double s = 0.0;
  for (double v : m) s += v;
  return s;
}

Measure pushforward(const FiniteEqRel& rel, const Measure& lambda) {
  Measure out(rel.size(), 0.0);
  for (std::size_t x = 0; x < rel.size(); ++x)
    for (std::size_t y = 0; y < rel.size(); ++y) out[y] += lambda[x] * rel.p(x, y);
  return out;
}

// Pointwise comparison with relative tolerance.
bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * (std::abs(a) + std::abs(b)); }

double entropy_of_row(const SquareMatrix& m, std::size_t x) {
  double h = 0.0;
  for (std::size_t y = 0; y < m.size(); ++y) {
    const double v = m(x, y);
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

Measure normalized(const Measure& m) {
  const double s = mass(m);
  if (!(s > 0.0)) throw std::invalid_argument("measure has zero mass");
  Measure out(m);
  for (double& v : out) v /= s;
  return out;
}

}  // namespace

MarkovImage apply_markov(const FiniteEqRel& rel, const Measure& lambda, double tolerance) {
  check_measure(rel, lambda);
  MarkovImage out;
  out.pushforward = pushforward(rel, lambda);
  out.density.assign(rel.size(), 0.0);
  for (std::size_t y = 0; y < rel.size(); ++y) {
    double d = 0.0;
    for (auto x : rel.members(y)) d += rel.p(x, y) * radon_nikodym(rel, y, x) * (lambda[x] / rel.mu()[x]);
    out.density[y] = d;
    out.max_diff = std::max(out.max_diff, std::abs(out.pushforward[y] - d * rel.mu()[y]));
  }
  if (out.max_diff > tolerance * std::max(1.0, mass(lambda))) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "density formula differs from pushforward by %.3g", out.max_diff);
    throw FormulaMismatch(buf);
  }
  return out;
}

LeafwiseMeasure leafwise_measure(const FiniteEqRel& rel, const Measure& lambda, std::size_t x) {
  check_measure(rel, lambda);
  LeafwiseMeasure out;
  out.base = x;
  out.points = rel.members(x);
  for (auto y : out.points) out.weights.push_back(lambda[y] / rel.mu()[y] * radon_nikodym(rel, x, y));
  return out;
}

StationarityReport stationarity_check(const FiniteEqRel& rel, const Measure& lambda, double tolerance) {
  check_measure(rel, lambda);
  StationarityReport r;
  const Measure lp = pushforward(rel, lambda);
  r.global = true;
  for (std::size_t y = 0; y < rel.size(); ++y) {
    r.global_residual += std::abs(lp[y] - lambda[y]);
    if (!close(lp[y], lambda[y], tolerance)) r.global = false;
  }
  r.leafwise = true;
  for (std::size_t x = 0; x < rel.size(); ++x) {
    const auto lx = leafwise_measure(rel, lambda, x);
    double res = 0.0;
    for (std::size_t j = 0; j < lx.points.size(); ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < lx.points.size(); ++i) s += lx.weights[i] * rel.p(lx.points[i], lx.points[j]);
      res += std::abs(s - lx.weights[j]);
      if (!close(s, lx.weights[j], tolerance)) r.leafwise = false;
    }
    r.leafwise_residual = std::max(r.leafwise_residual, res);
  }
  r.agree = r.global == r.leafwise;
  return r;
}

Measure stationary_measure(const FiniteEqRel& rel, double class_mass) {
  Measure out(rel.size(), 0.0);
  std::vector<bool> done(rel.size(), false);
  for (std::size_t x0 = 0; x0 < rel.size(); ++x0) {
    if (done[x0]) continue;
    const auto& m = rel.members(x0);
    const std::size_t s = m.size();
    // Rows j < s-1: sum_i pi_i (p(i,j) - [i=j]) = 0; last row: sum_i pi_i = class_mass.
    std::vector<std::vector<double>> a(s, std::vector<double>(s + 1, 0.0));
    for (std::size_t j = 0; j + 1 < s; ++j)
      for (std::size_t i = 0; i < s; ++i) a[j][i] = rel.p(m[i], m[j]) - (i == j ? 1.0 : 0.0);
    for (std::size_t i = 0; i < s; ++i) a[s - 1][i] = 1.0;
    a[s - 1][s] = class_mass;
    for (std::size_t c = 0; c < s; ++c) {
      std::size_t piv = c;
      for (std::size_t r = c + 1; r < s; ++r)
        if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
      if (std::abs(a[piv][c]) < 1e-13)
        throw std::invalid_argument("class of point " + std::to_string(x0) + " is not irreducible");
      std::swap(a[c], a[piv]);
      for (std::size_t r = 0; r < s; ++r) {
        if (r == c || a[r][c] == 0.0) continue;
        const double f = a[r][c] / a[c][c];
        for (std::size_t k = c; k <= s; ++k) a[r][k] -= f * a[c][k];
      }
    }
    for (std::size_t i = 0; i < s; ++i) {
      out[m[i]] = a[i][s] / a[i][i];
      done[m[i]] = true;
    }
  }
  return out;
}

Measure degree_measure(const FiniteEqRel& rel) {
  Measure out(rel.size());
  for (std::size_t x = 0; x < rel.size(); ++x) out[x] = static_cast<double>(rel.degree(x)) * rel.mu()[x];
  return out;
}

SquareMatrix cotransition(const FiniteEqRel& rel, const Measure& lambda) {
  check_measure(rel, lambda);
  for (double v : lambda)
    if (!(v > 0.0)) throw std::invalid_argument("cotransition needs a positive measure");
  const auto st = stationarity_check(rel, lambda);
  if (!st.global) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "measure is not stationary (residual %.3g)", st.global_residual);
    throw NotStationary(buf);
  }
  SquareMatrix c(rel.size());
  for (std::size_t x = 0; x < rel.size(); ++x)
    for (std::size_t y = 0; y < rel.size(); ++y)
      if (rel.p(x, y) > 0.0) c(y, x) = rel.p(x, y) * (lambda[x] / lambda[y]);
  return c;
}

ReversibilityReport reversibility_check(const FiniteEqRel& rel, const Measure& lambda, double tolerance) {
  const auto c = cotransition(rel, lambda);
  const Measure lp = pushforward(rel, lambda);
  ReversibilityReport r;
  for (std::size_t x = 0; x < rel.size(); ++x)
    for (std::size_t y = 0; y < rel.size(); ++y) {
      r.max_violation = std::max(r.max_violation, std::abs(c(x, y) - rel.p(x, y)));
      r.detailed_balance = std::max(r.detailed_balance, std::abs(lambda[x] * rel.p(x, y) - lp[y] * c(y, x)));
    }
  r.reversible = r.max_violation <= tolerance;
  return r;
}

double cocycle_expectation(const FiniteEqRel& rel, const Measure& lambda, const SquareMatrix& c) {
  check_measure(rel, lambda);
  double e = 0.0;
  for (std::size_t x = 0; x < rel.size(); ++x)
    for (std::size_t y = 0; y < rel.size(); ++y)
      if (rel.p(x, y) > 0.0) e += lambda[x] * rel.p(x, y) * c(x, y);
  return e;
}

std::vector<double> average_entropies(const FiniteEqRel& rel, const Measure& lambda, std::size_t n_max) {
  check_measure(rel, lambda);
  const Measure w = normalized(lambda);
  std::vector<double> h{0.0};
  SquareMatrix pn = SquareMatrix::identity(rel.size());
  for (std::size_t n = 1; n <= n_max; ++n) {
    pn = pn * rel.kernel();
    double s = 0.0;
    for (std::size_t x = 0; x < rel.size(); ++x)
      if (w[x] > 0.0) s += w[x] * entropy_of_row(pn, x);
    h.push_back(s);
  }
  return h;
}

ConditionalEntropy conditional_entropy_identity(const FiniteEqRel& rel, const Measure& lambda, std::size_t k,
                                                std::size_t n, std::size_t max_terms) {
  if (k < 1 || k > n) throw std::invalid_argument("need 1 <= k <= n");
  const std::size_t N = rel.size();
  std::size_t terms = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (terms > max_terms / N) {
      throw BudgetExceeded("path enumeration needs " + std::to_string(N) + "^" + std::to_string(n) +
                           " terms; budget is " + std::to_string(max_terms) + " (lower n)");
    }
    terms *= N;
  }
  const auto st = stationarity_check(rel, lambda);
  if (!st.global) throw NotStationary("conditional entropy identity needs a stationary measure");
  const Measure w = normalized(lambda);

  ConditionalEntropy out;
  out.k = k;
  out.n = n;
  std::vector<std::size_t> path(n + 1);
  for (std::size_t x0 = 0; x0 < N; ++x0) {
    if (!(w[x0] > 0.0)) continue;
    // joint[(x_1..x_k, x_n)] and marginal[x_n], both summed over whole paths.
    std::map<std::uint64_t, double> joint;
    std::vector<double> marginal(N, 0.0);
    path[0] = x0;
    auto walk = [&](auto&& self, std::size_t depth, double prob) -> void {
      if (depth == n) {
        std::uint64_t key = 0;
        for (std::size_t i = 1; i <= k; ++i) key = key * N + path[i];
        key = key * N + path[n];
        joint[key] += prob;
        marginal[path[n]] += prob;
        ++out.paths;
        return;
      }
      for (auto y : rel.members(path[depth])) {
        const double q = rel.p(path[depth], y);
        if (q <= 0.0) continue;
        path[depth + 1] = y;
        self(self, depth + 1, prob * q);
      }
    };
    walk(walk, 0, 1.0);
    double h = 0.0;
    for (const auto& [key, j] : joint) h -= j * std::log(j / marginal[key % N]);
    out.lhs += w[x0] * h;
  }
  const auto H = average_entropies(rel, lambda, n);
  out.rhs = static_cast<double>(k) * H[1] + H[n - k] - H[n];
  out.diff = std::abs(out.lhs - out.rhs);
  return out;
}

std::vector<double> phi_diagnostic(const FiniteEqRel& rel, std::size_t n) {
  SquareMatrix pn = SquareMatrix::identity(rel.size());
  for (std::size_t i = 0; i < n; ++i) pn = pn * rel.kernel();
  const SquareMatrix next = pn * rel.kernel();
  std::vector<double> out(rel.size(), 0.0);
  for (std::size_t x = 0; x < rel.size(); ++x)
    for (std::size_t y = 0; y < rel.size(); ++y) out[x] += std::abs(pn(x, y) - next(x, y));
  return out;
}

FiniteEqRel random_relation(std::uint64_t seed, std::size_t max_points) {
  if (max_points == 0) throw std::invalid_argument("max_points must be positive");
  SplitMix64 rng(seed);
  const std::size_t n = 1 + uniform_index(rng(), static_cast<std::uint32_t>(max_points));
  const std::size_t c = 1 + uniform_index(rng(), static_cast<std::uint32_t>(n));
  std::vector<std::size_t> labels(n);
  for (auto& l : labels) l = uniform_index(rng(), static_cast<std::uint32_t>(c));
  Measure mu(n);
  for (auto& m : mu) m = 0.1 + 2.0 * uniform01(rng());

  std::map<std::size_t, std::vector<std::size_t>> classes;
  for (std::size_t x = 0; x < n; ++x) classes[labels[x]].push_back(x);
  SquareMatrix p(n);
  for (const auto& [label, m] : classes) {
    const std::size_t s = m.size();
    for (std::size_t i = 0; i < s; ++i) {
      for (std::size_t j = 0; j < s; ++j)
        if (uniform01(rng()) < 0.6) p(m[i], m[j]) = uniform01(rng());
      // A cycle through the class keeps it irreducible.
      p(m[i], m[(i + 1) % s]) += 0.05 + uniform01(rng());
    }
    for (auto x : m) {
      double t = 0.0;
      for (auto y : m) t += p(x, y);
      for (auto y : m) p(x, y) /= t;
    }
  }
  return FiniteEqRel(std::move(labels), std::move(mu), std::move(p));
}

FiniteEqRel random_graphed_relation(std::uint64_t seed, std::size_t max_points) {
  if (max_points < 2) throw std::invalid_argument("graphed relations need at least 2 points");
  SplitMix64 rng(seed);
  const std::size_t n = 2 + uniform_index(rng(), static_cast<std::uint32_t>(max_points - 1));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng(), static_cast<std::uint32_t>(i))]);

  std::vector<std::size_t> labels(n);
  Measure mu(n);
  std::vector<FiniteEqRel::Edge> edges;
  std::size_t at = 0, label = 0;
  while (at < n) {
    std::size_t size = 2 + uniform_index(rng(), static_cast<std::uint32_t>(n - 1));
    if (n - at - std::min(size, n - at) < 2) size = n - at;  // no singleton leftovers
    const double weight = 0.1 + 2.0 * uniform01(rng());
    std::vector<std::size_t> cls(order.begin() + at, order.begin() + at + size);
    for (auto x : cls) {
      labels[x] = label;
      mu[x] = weight;
    }
    for (std::size_t i = 1; i < size; ++i)
      edges.emplace_back(cls[i], cls[uniform_index(rng(), static_cast<std::uint32_t>(i))]);
    for (std::size_t i = 0; i < size; ++i)
      for (std::size_t j = i + 1; j < size; ++j)
        if (uniform01(rng()) < 0.3) edges.emplace_back(cls[i], cls[j]);
    at += size;
    ++label;
  }
  return FiniteEqRel::simple_walk(std::move(labels), std::move(mu), std::move(edges));
}

Measure random_measure(std::uint64_t seed, std::size_t n) {
  SplitMix64 rng(seed);
  Measure m(n);
  for (auto& v : m) v = 0.05 + uniform01(rng());
  return m;
}

SquareMatrix random_antisymmetric(std::uint64_t seed, const FiniteEqRel& rel) {
  SplitMix64 rng(seed);
  SquareMatrix c(rel.size());
  for (std::size_t x = 0; x < rel.size(); ++x)
    for (std::size_t y = x + 1; y < rel.size(); ++y)
      if (rel.equivalent(x, y)) {
        c(x, y) = uniform01(rng()) - 0.5;
        c(y, x) = -c(x, y);
      }
  return c;
}

namespace {

class LineParser {
 public:
  LineParser(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(std::size_t line, const std::string& msg) const {
    throw ParseError(source_ + ":" + std::to_string(line) + ": " + msg);
  }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(source_ + ": " + msg); }

  double number(std::size_t line, const std::string& tok) const {
    double v = 0.0;
    const auto* end = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(tok.data(), end, v);
    if (ec != std::errc() || ptr != end) fail(line, "expected a number, got '" + tok + "'");
    return v;
  }

  std::size_t index(std::size_t line, const std::string& tok) const {
    std::size_t v = 0;
    const auto* end = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(tok.data(), end, v);
    if (ec != std::errc() || ptr != end) fail(line, "expected a nonnegative integer, got '" + tok + "'");
    return v;
  }

 private:
  std::string source_;
};

}  // namespace

RelationFile read_relation(std::istream& in, const std::string& source) {
  LineParser lp(source);
  std::optional<std::size_t> n;
  std::optional<std::vector<std::size_t>> labels;
  std::optional<Measure> mu, lambda;
  std::vector<std::optional<std::pair<std::size_t, std::vector<double>>>> rows;  // (line, values)
  bool simple = false;
  std::size_t simple_line = 0;
  std::vector<std::pair<std::size_t, FiniteEqRel::Edge>> edges;

  auto need_n = [&](std::size_t line) {
    if (!n) lp.fail(line, "'points' must come first");
    return *n;
  };
  auto read_values = [&](std::size_t line, std::istringstream& ss, std::size_t count, const std::string& what) {
    std::vector<std::string> toks;
    for (std::string t; ss >> t;) toks.push_back(t);
    if (toks.size() != count)
      lp.fail(line, what + " needs " + std::to_string(count) + " values, got " + std::to_string(toks.size()));
    return toks;
  };

  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (auto hash = text.find('#'); hash != std::string::npos) text.resize(hash);
    std::istringstream ss(text);
    std::string key;
    if (!(ss >> key)) continue;
    if (key == "points") {
      if (n) lp.fail(line, "duplicate 'points'");
      auto t = read_values(line, ss, 1, "points");
      n = lp.index(line, t[0]);
      if (*n == 0) lp.fail(line, "points must be positive");
      rows.assign(*n, std::nullopt);
    } else if (key == "classes") {
      auto t = read_values(line, ss, need_n(line), "classes");
      labels.emplace();
      for (const auto& s : t) labels->push_back(lp.index(line, s));
    } else if (key == "mu" || key == "lambda") {
      auto t = read_values(line, ss, need_n(line), key);
      Measure m;
      for (const auto& s : t) {
        const double v = lp.number(line, s);
        if (key == "mu" ? !(v > 0.0) : !(v >= 0.0)) lp.fail(line, key + " weights must be " + (key == "mu" ? "positive" : "nonnegative"));
        m.push_back(v);
      }
      (key == "mu" ? mu : lambda) = std::move(m);
    } else if (key == "row") {
      const std::size_t count = need_n(line);
      std::string first;
      if (!(ss >> first)) lp.fail(line, "row needs an index");
      const std::size_t i = lp.index(line, first);
      if (i >= count) lp.fail(line, "row index " + std::to_string(i) + " out of range");
      if (rows[i]) lp.fail(line, "duplicate row " + std::to_string(i));
      auto t = read_values(line, ss, count, "row");
      std::vector<double> vals;
      for (const auto& s : t) vals.push_back(lp.number(line, s));
      rows[i] = std::make_pair(line, std::move(vals));
    } else if (key == "kernel") {
      auto t = read_values(line, ss, 1, "kernel");
      if (t[0] != "simple") lp.fail(line, "only 'kernel simple' is supported; give rows otherwise");
      simple = true;
      simple_line = line;
    } else if (key == "edge") {
      const std::size_t count = need_n(line);
      auto t = read_values(line, ss, 2, "edge");
      const auto a = lp.index(line, t[0]), b = lp.index(line, t[1]);
      if (a >= count || b >= count) lp.fail(line, "edge endpoint out of range");
      if (a == b) lp.fail(line, "edge is a loop");
      edges.emplace_back(line, FiniteEqRel::Edge{a, b});
    } else {
      lp.fail(line, "unknown keyword '" + key + "'");
    }
  }

  if (!n) lp.fail("missing 'points'");
  if (!labels) lp.fail("missing 'classes'");
  if (!mu) lp.fail("missing 'mu'");
  for (const auto& [l, e] : edges)
    if ((*labels)[e.first] != (*labels)[e.second]) lp.fail(l, "edge crosses classes");
  std::vector<FiniteEqRel::Edge> plain;
  for (const auto& [l, e] : edges) plain.push_back(e);

  try {
    if (simple) {
      for (const auto& r : rows)
        if (r) lp.fail(r->first, "rows given together with 'kernel simple'");
      if (plain.empty()) lp.fail(simple_line, "'kernel simple' needs edges");
      return {FiniteEqRel::simple_walk(*labels, *mu, plain), lambda};
    }
    SquareMatrix p(*n);
    for (std::size_t i = 0; i < *n; ++i) {
      if (!rows[i]) lp.fail("missing row " + std::to_string(i));
      const auto& [l, vals] = *rows[i];
      double s = 0.0;
      for (std::size_t j = 0; j < *n; ++j) {
        if (!(vals[j] >= 0.0)) lp.fail(l, "negative transition probability");
        if (vals[j] > 0.0 && (*labels)[i] != (*labels)[j])
          lp.fail(l, "p(" + std::to_string(i) + "," + std::to_string(j) + ") leaves the class");
        p(i, j) = vals[j];
        s += vals[j];
      }
      if (std::abs(s - 1.0) > 1e-12) lp.fail(l, "row sums to " + std::to_string(s) + ", not 1");
    }
    return {FiniteEqRel(*labels, *mu, std::move(p), plain), lambda};
  } catch (const std::invalid_argument& e) {
    lp.fail(e.what());
  }
}

RelationFile load_relation(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open");
  return read_relation(in, path);
}

void write_relation(std::ostream& out, const FiniteEqRel& rel, const Measure* lambda) {
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  const std::size_t n = rel.size();
  out << "points " << n << "\nclasses";
  for (std::size_t x = 0; x < n; ++x) out << ' ' << rel.class_of(x);
  out << "\nmu";
  for (double v : rel.mu()) out << ' ' << num(v);
  out << '\n';
  for (std::size_t x = 0; x < n; ++x) {
    out << "row " << x;
    for (std::size_t y = 0; y < n; ++y) out << ' ' << num(rel.p(x, y));
    out << '\n';
  }
  for (auto [a, b] : rel.edges()) out << "edge " << a << ' ' << b << '\n';
  if (lambda) {
    out << "lambda";
    for (double v : *lambda) out << ' ' << num(v);
    out << '\n';
  }
}

RelationVerification verify_relation(const FiniteEqRel& rel, const std::optional<Measure>& lambda,
                                     std::uint64_t seed, std::size_t n_max, std::size_t max_terms) {
  RelationVerification v;
  const std::size_t n = rel.size();
  v.points = n;
  v.classes = rel.class_count();

  for (std::size_t x = 0; x < n; ++x)
    for (auto y : rel.members(x))
      for (auto z : rel.members(x)) {
        const double direct = radon_nikodym(rel, x, z);
        const double via = radon_nikodym(rel, x, y) * radon_nikodym(rel, y, z);
        v.cocycle_multiplicativity = std::max(v.cocycle_multiplicativity, std::abs(direct - via) / direct);
      }

  const Measure tested = lambda ? *lambda : random_measure(seed, n);
  v.density_formula = apply_markov(rel, tested, std::numeric_limits<double>::infinity()).max_diff;
  v.tested = stationarity_check(rel, tested);

  const Measure st = stationary_measure(rel, 1.0 / static_cast<double>(rel.class_count()));
  v.stationary = stationarity_check(rel, st);

  bool invariant = true;
  for (std::size_t x = 0; x < n && invariant; ++x)
    for (auto y : rel.members(x))
      if (rel.mu()[x] != rel.mu()[y]) invariant = false;
  if (rel.has_graph() && invariant) {
    bool simple = true;
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y) {
        const bool edge = std::binary_search(rel.edges().begin(), rel.edges().end(),
                                             FiniteEqRel::Edge{std::min(x, y), std::max(x, y)});
        const double expect = edge ? 1.0 / static_cast<double>(rel.degree(x)) : 0.0;
        if (rel.p(x, y) != expect) simple = false;
      }
    if (simple) v.degree = stationarity_check(rel, degree_measure(rel), 1e-14);
  }

  v.reversibility = reversibility_check(rel, st);
  v.cocycle_expectation = cocycle_expectation(rel, normalized(st), random_antisymmetric(seed ^ 0xC0C1C1EULL, rel));

  std::vector<double> k1;
  for (std::size_t m = 1; m <= n_max; ++m) {
    bool fits = true;
    std::size_t terms = 1;
    for (std::size_t i = 0; i < m && fits; ++i) {
      if (terms > max_terms / n) fits = false;
      else terms *= n;
    }
    if (!fits) break;
    for (std::size_t k = 1; k <= m; ++k) {
      v.identities.push_back(conditional_entropy_identity(rel, st, k, m, max_terms));
      if (k == 1) k1.push_back(v.identities.back().lhs);
    }
  }
  v.monotone = true;
  for (std::size_t i = 0; i + 1 < k1.size(); ++i)
    if (k1[i + 1] < k1[i] - 1e-10) v.monotone = false;
  for (std::size_t m = 1; m <= n_max; ++m) {
    const auto phi = phi_diagnostic(rel, m);
    v.phi.push_back(*std::max_element(phi.begin(), phi.end()));
  }

  v.passed = v.cocycle_multiplicativity <= 1e-14 && v.density_formula <= 1e-12 * std::max(1.0, mass(tested)) &&
             v.tested.agree && v.stationary.global && v.stationary.leafwise &&
             (!v.degree || (v.degree->global && v.degree->leafwise)) && v.reversibility.detailed_balance <= 1e-12 &&
             (!v.reversibility.reversible || std::abs(v.cocycle_expectation) <= 1e-12) && v.monotone;
  for (const auto& id : v.identities) v.passed = v.passed && id.diff <= 1e-10;
  return v;
}

}  // namespace horo
