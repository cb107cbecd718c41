#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "horo/boundary.hpp"
#include "horo/walk.hpp"

namespace horo {

struct SimulationOptions {
  std::size_t n = 1000;
  std::size_t walks = 100;
  std::uint64_t seed = 1;
  /// End indices that must stabilize for a boundary verdict.
  std::size_t prefix_depth = 10;
  /// Minimal height gain per step over the last half for a boundary verdict.
  double min_rate = 0.05;
  /// Number of evenly spaced checkpoints recorded for the time series.
  std::size_t checkpoints = 20;
};

struct WalkRecord {
  std::uint64_t seed = 0;
  Height final_height = 0;
  std::int64_t final_distance = 0;
  /// Sum over visited vertices of the exact expected height increment.
  double expected_increment_sum = 0.0;
  LimitVerdict verdict;
};

struct Checkpoint {
  std::size_t n = 0;
  double mean_height = 0.0;    // mean of height(X_n) - height(X_0)
  double mean_distance = 0.0;  // mean of d(X_0, X_n)
};

/// Per-walk records in walk order plus checkpoint averages. Walk i uses seed
/// walk_seed(options.seed, i).
struct Simulation {
  SimulationOptions options;
  std::vector<WalkRecord> walks;
  std::vector<Checkpoint> series;
};

Simulation simulate(const ProductEnv& envs, const Kernel& kernel, const ProductVertex& start,
                    const SimulationOptions& options);

struct MeanEstimate {
  double mean = 0.0;
  double ci = 0.0;  // 1.96 standard errors
};

MeanEstimate mean_with_ci(std::span<const double> xs);

struct DriftEstimate {
  double trajectory = 0.0;  // mean of height(X_n)/n
  double ci = 0.0;
  /// Mean over visited vertices of the exact one-step expectation sum_y p(x,y) B(x,y).
  double one_step = 0.0;
  /// Exact one-step expectation at the start vertex.
  double one_step_at_start = 0.0;
};

DriftEstimate drift_estimate(const Simulation& sim, const ProductEnv& envs, const Kernel& kernel,
                             const ProductVertex& start);
DriftEstimate drift_estimate(const ProductEnv& envs, const Kernel& kernel, const ProductVertex& start, std::size_t n,
                             std::size_t walks, std::uint64_t seed);

/// Mean of d(X_0, X_n)/n.
MeanEstimate speed_estimate(const Simulation& sim);
MeanEstimate speed_estimate(const ProductEnv& envs, const Kernel& kernel, const ProductVertex& start, std::size_t n,
                            std::size_t walks, std::uint64_t seed);

/// H_0, ..., H_{n_max} of the exact n-step laws (nats).
std::vector<double> entropy_sequence(const ProductEnv& envs, const Kernel& kernel, const ProductVertex& start,
                                     std::size_t n_max, std::size_t budget = 2'000'000);

/// Literal differences H_{n+1} - H_n.
std::vector<double> increments(std::span<const double> h);

/// True if the increments never grow by more than `slack`.
bool increments_nonincreasing(std::span<const double> h, double slack = 1e-9);

struct EnvironmentAverage {
  std::vector<double> mean;
  std::vector<double> spread;  // standard deviation across environments
  std::size_t environments = 0;
};

/// Averages H_n over several environments (for random trees).
EnvironmentAverage entropy_sequence_over_environments(std::span<const ProductEnv> envs, const Kernel& kernel,
                                                      std::size_t n_max, std::size_t budget = 2'000'000);

struct EntropyEstimate {
  std::vector<double> entropies;
  double last_increment = 0.0;     // estimator (a)
  double h_over_n = 0.0;           // exact H_n / n at n_max
  MeanEstimate sampled;            // estimator (b): mean of -(1/n) log p^n(X_0, X_n)
  double gap = 0.0;                // |a - b|
  bool agree = false;              // gap <= tolerance
  double tolerance = 0.05;
};

EntropyEstimate asymptotic_entropy_estimate(const ProductEnv& envs, const Kernel& kernel, const ProductVertex& start,
                                            std::size_t n_max, std::size_t walks, std::uint64_t seed,
                                            std::size_t budget = 2'000'000, double tolerance = 0.05);

struct RegularityReport {
  double lambda = 0.0;
  std::size_t length = 0;
  /// (i) max over the last half of d(X_m, Phi(round(lambda m)))/m; unset without a candidate ray.
  std::optional<double> tracking;
  /// (ii) max over the last half of d(X_m, X_{m+1})/m.
  double jump = 0.0;
  /// (ii) least-squares slope of heights over the last half and the largest
  /// normalized residual of that fit.
  double height_slope = 0.0;
  double height_residual = 0.0;
  double drift_gap = 0.0;  // | |slope| - lambda |
  /// (iii) projection tracking against the ray, or |d(x_0, x_m) - lambda m|/m
  /// for both projections without one.
  double tree = 0.0;
  double threshold = 0.05;
  bool regular = false;
};

/// Streaming version of regularity_check over a sequence of known length.
class RegularityMonitor {
 public:
  RegularityMonitor(double lambda, std::size_t length, std::optional<GeodesicRay> ray = std::nullopt,
                    double threshold = 0.05);

  void observe(const ProductVertex& v);
  RegularityReport report() const;

 private:
  double lambda_;
  std::size_t length_;
  std::size_t half_;
  std::optional<GeodesicRay> ray_;
  double threshold_;
  std::size_t m_ = 0;
  std::optional<ProductVertex> first_;
  std::optional<ProductVertex> prev_;
  std::vector<double> heights_;  // last half only
  double tracking_ = 0.0;
  double jump_ = 0.0;
  double tree_ = 0.0;
};

RegularityReport regularity_check(std::span<const ProductVertex> sequence, double lambda,
                                  std::optional<GeodesicRay> ray = std::nullopt, double threshold = 0.05);

/// Regularity of one sampled walk against the ray toward its own detected
/// limit: a first pass finds the limit, a second pass replays the same seed
/// against the geodesic ray from the start toward that limit.
struct WalkRegularity {
  LimitVerdict verdict;
  RegularityReport report;
};

WalkRegularity walk_regularity(const ProductEnv& envs, const Kernel& kernel, const ProductVertex& start,
                               std::size_t n, std::uint64_t seed, double lambda, std::size_t prefix_depth = 10,
                               double threshold = 0.05);

struct BoundaryStats {
  std::size_t walks = 0;
  std::size_t prefix_depth = 0;
  std::size_t upper = 0;
  std::size_t lower = 0;
  std::size_t none = 0;
  /// Sign of the exact one-step drift at the start on homogeneous products; on
  /// random ones the sign of the trajectory drift, or 0 within two confidence radii.
  int drift_sign = 0;
  double match_fraction = 0.0;
  /// First prefix_depth indices of the detected end, keyed "side:anchor:i1,i2,...".
  std::map<std::string, std::size_t> histogram;

  double fraction(LimitKind k) const;
};

BoundaryStats boundary_convergence_stats(const Simulation& sim, const ProductEnv& envs, const Kernel& kernel,
                                         const ProductVertex& start);
BoundaryStats boundary_convergence_stats(const ProductEnv& envs, const Kernel& kernel, const ProductVertex& start,
                                         std::size_t n, std::size_t walks, std::size_t prefix_depth,
                                         std::uint64_t seed);

/// Everything estimated for one experiment.
struct EstimateReport {
  std::size_t n = 0;
  std::size_t walks = 0;
  std::uint64_t seed = 0;
  DriftEstimate drift;
  MeanEstimate speed;
  std::optional<EntropyEstimate> entropy;  // absent when the DP was skipped
  BoundaryStats boundary;
  std::vector<Checkpoint> series;
};

/// Aligned text summary for humans.
void write_text(std::ostream& out, const EstimateReport& r);
/// CSV time series: n,H_n,increment,speed_hat,drift_hat (empty cells where not computed).
void write_series_csv(std::ostream& out, const EstimateReport& r);

}  // namespace horo
