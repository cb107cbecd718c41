#include "horo/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace horo {

namespace {

double expected_increment(const Kernel& kernel, ChildIndex down, ChildIndex up, const ProductVertex& v,
                          std::vector<double>& buf) {
  kernel.move_probabilities(down, up, &v, buf);
  double e = 0.0;
  for (ChildIndex i = 0; i < down; ++i) e -= buf[i];
  for (ChildIndex j = 0; j < up; ++j) e += buf[down + j];
  return (1.0 - kernel.hold()) * e;
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

}  // namespace

Simulation simulate(const ProductEnv& envs, const Kernel& kernel, const ProductVertex& start,
                    const SimulationOptions& options) {
  if (options.n == 0 || options.walks == 0) throw std::invalid_argument("n and walks must be positive");
  Simulation sim;
  sim.options = options;
  const std::size_t cps = std::min(options.checkpoints, options.n);
  std::vector<std::size_t> marks;
  for (std::size_t k = 1; k <= cps; ++k) marks.push_back(options.n * k / cps);
  sim.series.resize(marks.size());
  for (std::size_t k = 0; k < marks.size(); ++k) sim.series[k].n = marks[k];

  std::vector<double> buf;
  for (std::size_t w = 0; w < options.walks; ++w) {
    WalkRecord rec;
    rec.seed = walk_seed(options.seed, w);
    Walker walker(envs, kernel, start, rec.seed);
    LimitDetector detector(options.n + 1, options.prefix_depth, options.min_rate);
    detector.observe(walker.current());
    std::size_t next_mark = 0;
    for (std::size_t i = 0; i < options.n; ++i) {
      const auto& v = walker.current();
      rec.expected_increment_sum += expected_increment(kernel, envs.tree.offspring(v.x()),
                                                       envs.tree_prime.offspring(v.x_prime()), v, buf);
      walker.step();
      detector.observe(walker.current());
      if (next_mark < marks.size() && i + 1 == marks[next_mark]) {
        sim.series[next_mark].mean_height += static_cast<double>(walker.current().height() - start.height());
        sim.series[next_mark].mean_distance += static_cast<double>(product_distance(start, walker.current()));
        ++next_mark;
      }
    }
    rec.final_height = walker.current().height() - start.height();
    rec.final_distance = product_distance(start, walker.current());
    rec.verdict = detector.verdict();
    sim.walks.push_back(std::move(rec));
  }
  for (auto& c : sim.series) {
    c.mean_height /= static_cast<double>(options.walks);
    c.mean_distance /= static_cast<double>(options.walks);
  }
  return sim;
}

MeanEstimate mean_with_ci(std::span<const double> xs) {
  MeanEstimate out;
  if (xs.empty()) return out;
  double s = 0.0;
  for (double x : xs) s += x;
  out.mean = s / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    const double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    out.ci = 1.96 * sd / std::sqrt(static_cast<double>(xs.size()));
  }
  return out;
}

DriftEstimate drift_estimate(const Simulation& sim, const ProductEnv& envs, const Kernel& kernel,
                             const ProductVertex& start) {
  DriftEstimate d;
  std::vector<double> xs;
  double inc = 0.0;
  for (const auto& w : sim.walks) {
    xs.push_back(static_cast<double>(w.final_height) / static_cast<double>(sim.options.n));
    inc += w.expected_increment_sum;
  }
  const auto m = mean_with_ci(xs);
  d.trajectory = m.mean;
  d.ci = m.ci;
  d.one_step = inc / static_cast<double>(sim.walks.size() * sim.options.n);
  d.one_step_at_start = expected_height_increment(envs, kernel, start);
  return d;
}

DriftEstimate drift_estimate(const ProductEnv& envs, const Kernel& kernel, const ProductVertex& start, std::size_t n,
                             std::size_t walks, std::uint64_t seed) {
  SimulationOptions o;
  o.n = n;
  o.walks = walks;
  o.seed = seed;
  return drift_estimate(simulate(envs, kernel, start, o), envs, kernel, start);
}

MeanEstimate speed_estimate(const Simulation& sim) {
  std::vector<double> xs;
  for (const auto& w : sim.walks)
    xs.push_back(static_cast<double>(w.final_distance) / static_cast<double>(sim.options.n));
  return mean_with_ci(xs);
}

MeanEstimate speed_estimate(const ProductEnv& envs, const Kernel& kernel, const ProductVertex& start, std::size_t n,
                            std::size_t walks, std::uint64_t seed) {
  SimulationOptions o;
  o.n = n;
  o.walks = walks;
  o.seed = seed;
  return speed_estimate(simulate(envs, kernel, start, o));
}

std::vector<double> entropy_sequence(const ProductEnv& envs, const Kernel& kernel, const ProductVertex& start,
                                     std::size_t n_max, std::size_t budget) {
  NStepDistribution dp(envs, kernel, start, budget);
  dp.extend_to(n_max);
  std::vector<double> h;
  for (std::size_t n = 0; n <= n_max; ++n) h.push_back(dp.entropy(n));
  return h;
}

std::vector<double> increments(std::span<const double> h) {
  std::vector<double> out;
  for (std::size_t n = 0; n + 1 < h.size(); ++n) out.push_back(h[n + 1] - h[n]);
  return out;
}

bool increments_nonincreasing(std::span<const double> h, double slack) {
  const auto inc = increments(h);
  for (std::size_t i = 0; i + 1 < inc.size(); ++i)
    if (inc[i + 1] > inc[i] + slack) return false;
  return true;
}

EnvironmentAverage entropy_sequence_over_environments(std::span<const ProductEnv> envs, const Kernel& kernel,
                                                      std::size_t n_max, std::size_t budget) {
  EnvironmentAverage out;
  out.environments = envs.size();
  out.mean.assign(n_max + 1, 0.0);
  out.spread.assign(n_max + 1, 0.0);
  if (envs.empty()) return out;
  std::vector<std::vector<double>> all;
  for (const auto& e : envs) all.push_back(entropy_sequence(e, kernel, ProductVertex::origin(), n_max, budget));
  for (std::size_t n = 0; n <= n_max; ++n) {
    double s = 0.0;
    for (const auto& h : all) s += h[n];
    out.mean[n] = s / static_cast<double>(all.size());
    double ss = 0.0;
    for (const auto& h : all) ss += (h[n] - out.mean[n]) * (h[n] - out.mean[n]);
    out.spread[n] = all.size() > 1 ? std::sqrt(ss / static_cast<double>(all.size() - 1)) : 0.0;
  }
  return out;
}

EntropyEstimate asymptotic_entropy_estimate(const ProductEnv& envs, const Kernel& kernel, const ProductVertex& start,
                                            std::size_t n_max, std::size_t walks, std::uint64_t seed,
                                            std::size_t budget, double tolerance) {
  if (n_max == 0) throw std::invalid_argument("n_max must be positive");
  EntropyEstimate e;
  e.tolerance = tolerance;
  NStepDistribution dp(envs, kernel, start, budget);
  dp.extend_to(n_max);
  for (std::size_t n = 0; n <= n_max; ++n) e.entropies.push_back(dp.entropy(n));
  e.last_increment = e.entropies[n_max] - e.entropies[n_max - 1];
  e.h_over_n = e.entropies[n_max] / static_cast<double>(n_max);
  std::vector<double> xs;
  for (std::size_t w = 0; w < walks; ++w) {
    const auto end = sample_path(envs, kernel, start, n_max, walk_seed(seed, w)).end(envs);
    xs.push_back(-std::log(dp.probability(n_max, end)) / static_cast<double>(n_max));
  }
  e.sampled = mean_with_ci(xs);
  e.gap = std::abs(e.last_increment - e.sampled.mean);
  e.agree = e.gap <= tolerance;
  return e;
}

RegularityMonitor::RegularityMonitor(double lambda, std::size_t length, std::optional<GeodesicRay> ray,
                                     double threshold)
    : lambda_(lambda), length_(length), half_(std::max<std::size_t>(1, length / 2)), ray_(std::move(ray)),
      threshold_(threshold) {
  if (lambda < 0.0 || lambda > 1.0) throw std::invalid_argument("rate of escape must lie in [0, 1]");
}

void RegularityMonitor::observe(const ProductVertex& v) {
  const std::size_t m = m_++;
  if (!first_) first_ = v;
  const bool tail = m >= half_;
  if (prev_ && m - 1 >= half_) {
    jump_ = std::max(jump_, static_cast<double>(product_distance(*prev_, v)) / static_cast<double>(m - 1));
  }
  if (ray_) {
    const auto target = static_cast<std::size_t>(std::llround(lambda_ * static_cast<double>(m)));
    while (ray_->position() < target) ray_->advance();
  }
  if (tail) {
    const double md = static_cast<double>(m);
    heights_.push_back(static_cast<double>(v.height()));
    if (ray_) {
      const auto& phi = ray_->current();
      tracking_ = std::max(tracking_, static_cast<double>(product_distance(v, phi)) / md);
      const auto t = std::max(tree_distance(v.x(), phi.x()), tree_distance(v.x_prime(), phi.x_prime()));
      tree_ = std::max(tree_, static_cast<double>(t) / md);
    } else {
      const double dl = std::abs(static_cast<double>(tree_distance(first_->x(), v.x())) - lambda_ * md);
      const double du = std::abs(static_cast<double>(tree_distance(first_->x_prime(), v.x_prime())) - lambda_ * md);
      tree_ = std::max(tree_, std::max(dl, du) / md);
    }
  }
  prev_ = v;
}

RegularityReport RegularityMonitor::report() const {
  RegularityReport r;
  r.lambda = lambda_;
  r.length = m_;
  r.threshold = threshold_;
  r.jump = jump_;
  r.tree = tree_;
  if (ray_) r.tracking = tracking_;
  // Least-squares line through (m, height_m) over the last half.
  const std::size_t k = heights_.size();
  if (k >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < k; ++i) {
      const double x = static_cast<double>(half_ + i);
      sx += x;
      sy += heights_[i];
      sxx += x * x;
      sxy += x * heights_[i];
    }
    const double kd = static_cast<double>(k);
    const double denom = kd * sxx - sx * sx;
    r.height_slope = denom != 0.0 ? (kd * sxy - sx * sy) / denom : 0.0;
    const double icpt = (sy - r.height_slope * sx) / kd;
    for (std::size_t i = 0; i < k; ++i) {
      const double x = static_cast<double>(half_ + i);
      r.height_residual = std::max(r.height_residual, std::abs(heights_[i] - icpt - r.height_slope * x) / x);
    }
  }
  r.drift_gap = std::abs(std::abs(r.height_slope) - lambda_);
  r.regular = r.jump <= threshold_ && r.height_residual <= threshold_ && r.drift_gap <= threshold_ &&
              r.tree <= threshold_ && (!r.tracking || *r.tracking <= threshold_);
  return r;
}

RegularityReport regularity_check(std::span<const ProductVertex> sequence, double lambda,
                                  std::optional<GeodesicRay> ray, double threshold) {
  RegularityMonitor mon(lambda, sequence.size(), std::move(ray), threshold);
  for (const auto& v : sequence) mon.observe(v);
  return mon.report();
}

WalkRegularity walk_regularity(const ProductEnv& envs, const Kernel& kernel, const ProductVertex& start,
                               std::size_t n, std::uint64_t seed, double lambda, std::size_t prefix_depth,
                               double threshold) {
  WalkRegularity out;
  Walker first(envs, kernel, start, seed);
  LimitDetector detector(n + 1, prefix_depth);
  detector.observe(first.current());
  for (std::size_t i = 0; i < n; ++i) {
    first.step();
    detector.observe(first.current());
  }
  out.verdict = detector.verdict();

  std::optional<GeodesicRay> ray;
  if (out.verdict.kind != LimitKind::none) {
    // Aim at the end through the final position of the converging coordinate.
    const bool up = out.verdict.kind == LimitKind::upper;
    const auto& last = up ? first.current().x_prime() : first.current().x();
    End end(TreeVertexAddr::spine(last.spine_depth()), std::vector<ChildIndex>(last.descent().begin(), last.descent().end()));
    BoundaryPoint limit{up ? BoundarySide::upper : BoundarySide::lower, std::move(end)};
    ray.emplace(envs, start, default_ray_target(envs, start, std::move(limit)));
  }
  RegularityMonitor mon(lambda, n + 1, std::move(ray), threshold);
  Walker replay(envs, kernel, start, seed);
  mon.observe(replay.current());
  for (std::size_t i = 0; i < n; ++i) {
    replay.step();
    mon.observe(replay.current());
  }
  out.report = mon.report();
  return out;
}

double BoundaryStats::fraction(LimitKind k) const {
  if (walks == 0) return 0.0;
  const std::size_t c = k == LimitKind::upper ? upper : k == LimitKind::lower ? lower : none;
  return static_cast<double>(c) / static_cast<double>(walks);
}

BoundaryStats boundary_convergence_stats(const Simulation& sim, const ProductEnv& envs, const Kernel& kernel,
                                         const ProductVertex& start) {
  BoundaryStats s;
  s.walks = sim.walks.size();
  s.prefix_depth = sim.options.prefix_depth;
  if (envs.tree.is_homogeneous() && envs.tree_prime.is_homogeneous()) {
    const double h = expected_height_increment(envs, kernel, start);
    s.drift_sign = h > 1e-12 ? 1 : h < -1e-12 ? -1 : 0;
  } else {
    // The local expectation at one vertex says nothing about the global drift here.
    const auto d = drift_estimate(sim, envs, kernel, start);
    s.drift_sign = std::abs(d.trajectory) <= 2.0 * d.ci ? 0 : d.trajectory > 0 ? 1 : -1;
  }
  const LimitKind expected = s.drift_sign > 0 ? LimitKind::upper : s.drift_sign < 0 ? LimitKind::lower : LimitKind::none;
  std::size_t match = 0;
  for (const auto& w : sim.walks) {
    const auto& v = w.verdict;
    if (v.kind == LimitKind::upper) ++s.upper;
    else if (v.kind == LimitKind::lower) ++s.lower;
    else ++s.none;
    if (v.kind == expected) ++match;
    if (v.limit) {
      std::string key = std::string(limit_label(v.kind)) + ":" + std::to_string(v.limit->end.anchor().spine_depth()) + ":";
      const auto& pre = v.limit->end.prefix();
      for (std::size_t i = 0; i < std::min(pre.size(), s.prefix_depth); ++i) {
        if (i) key += ",";
        key += std::to_string(pre[i]);
      }
      ++s.histogram[key];
    }
  }
  s.match_fraction = s.walks ? static_cast<double>(match) / static_cast<double>(s.walks) : 0.0;
  return s;
}

BoundaryStats boundary_convergence_stats(const ProductEnv& envs, const Kernel& kernel, const ProductVertex& start,
                                         std::size_t n, std::size_t walks, std::size_t prefix_depth,
                                         std::uint64_t seed) {
  SimulationOptions o;
  o.n = n;
  o.walks = walks;
  o.seed = seed;
  o.prefix_depth = prefix_depth;
  return boundary_convergence_stats(simulate(envs, kernel, start, o), envs, kernel, start);
}

void write_text(std::ostream& out, const EstimateReport& r) {
  auto row = [&](const std::string& k, const std::string& v) { out << std::left << std::setw(28) << k << v << '\n'; };
  row("steps", std::to_string(r.n));
  row("walks", std::to_string(r.walks));
  row("seed", std::to_string(r.seed));
  row("drift (trajectory)", fmt(r.drift.trajectory) + " +- " + fmt(r.drift.ci));
  row("drift (one-step exact)", fmt(r.drift.one_step));
  row("drift at start", fmt(r.drift.one_step_at_start));
  row("speed", fmt(r.speed.mean) + " +- " + fmt(r.speed.ci));
  if (r.entropy) {
    row("entropy n_max", std::to_string(r.entropy->entropies.size() - 1));
    row("entropy last increment", fmt(r.entropy->last_increment));
    row("entropy H_n/n", fmt(r.entropy->h_over_n));
    row("entropy sampled", fmt(r.entropy->sampled.mean) + " +- " + fmt(r.entropy->sampled.ci));
  }
  row("boundary upper/lower/none",
      std::to_string(r.boundary.upper) + "/" + std::to_string(r.boundary.lower) + "/" + std::to_string(r.boundary.none));
  row("boundary matches drift", fmt(r.boundary.match_fraction));
}

void write_series_csv(std::ostream& out, const EstimateReport& r) {
  out << "n,H_n,increment,speed_hat,drift_hat\n";
  std::map<std::size_t, std::pair<std::string, std::string>> mc;
  for (const auto& c : r.series) {
    const double n = static_cast<double>(c.n);
    mc[c.n] = {fmt(c.mean_distance / n), fmt(c.mean_height / n)};
  }
  std::size_t last = r.series.empty() ? 0 : r.series.back().n;
  if (r.entropy) last = std::max(last, r.entropy->entropies.size() - 1);
  for (std::size_t n = 0; n <= last; ++n) {
    const bool has_h = r.entropy && n < r.entropy->entropies.size();
    auto it = mc.find(n);
    if (!has_h && it == mc.end()) continue;
    out << n << ',';
    if (has_h) {
      out << fmt(r.entropy->entropies[n]) << ',';
      if (n > 0) out << fmt(r.entropy->entropies[n] - r.entropy->entropies[n - 1]);
    } else {
      out << ',';
    }
    out << ',';
    if (it != mc.end()) out << it->second.first << ',' << it->second.second;
    else out << ',';
    out << '\n';
  }
}

}  // namespace horo
