#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace horo {

/// Dense row-major n x n matrix.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

  std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

  SquareMatrix operator*(const SquareMatrix& b) const;
  static SquareMatrix identity(std::size_t n);

  bool operator==(const SquareMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Point masses indexed by point.
using Measure = std::vector<double>;

/// Finite measured equivalence relation with a leafwise Markov kernel and an
/// optional graph structure. Points are 0..n-1; classes are numbered in order
/// of first appearance.
class FiniteEqRel {
 public:
  using Edge = std::pair<std::size_t, std::size_t>;

  /// Throws std::invalid_argument if mu is not positive, a row of p does not
  /// sum to 1 within 1e-12, p leaves a class, an edge is a loop or crosses
  /// classes, or a class is disconnected under a nonempty edge set.
  FiniteEqRel(std::vector<std::size_t> class_labels, Measure mu, SquareMatrix p, std::vector<Edge> edges = {});

  /// Simple random walk on the graph: p(x, y) = 1/deg(x) on edges.
  static FiniteEqRel simple_walk(std::vector<std::size_t> class_labels, Measure mu, std::vector<Edge> edges);

  std::size_t size() const noexcept { return mu_.size(); }
  std::size_t class_of(std::size_t x) const { return class_[x]; }
  bool equivalent(std::size_t x, std::size_t y) const { return class_[x] == class_[y]; }
  const std::vector<std::size_t>& members(std::size_t x) const { return members_[class_[x]]; }
  std::size_t class_count() const noexcept { return members_.size(); }

  const Measure& mu() const noexcept { return mu_; }
  const SquareMatrix& kernel() const noexcept { return p_; }
  double p(std::size_t x, std::size_t y) const { return p_(x, y); }

  bool has_graph() const noexcept { return !edges_.empty(); }
  /// Edges with first < second, sorted.
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  std::size_t degree(std::size_t x) const { return degree_[x]; }

 private:
  std::vector<std::size_t> class_;
  std::vector<std::vector<std::size_t>> members_;  // indexed by class number
  Measure mu_;
  SquareMatrix p_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> degree_;
};

/// Delta(x, y) = mu(y)/mu(x). Throws NotEquivalent if x and y lie in different classes.
double radon_nikodym(const FiniteEqRel& rel, std::size_t x, std::size_t y);

struct MarkovImage {
  Measure pushforward;  // sum_x lambda(x) p(x, y)
  Measure density;      // d(lambda P)/d mu via the cocycle formula
  double max_diff = 0.0;  // max_y |pushforward(y) - density(y) mu(y)|
};

/// Computes lambda P twice: as a matrix pushforward and through the density
/// formula with the Radon-Nikodym cocycle. Throws FormulaMismatch if they
/// differ by more than `tolerance` relative to the total mass.
MarkovImage apply_markov(const FiniteEqRel& rel, const Measure& lambda, double tolerance = 1e-12);

struct LeafwiseMeasure {
  std::size_t base = 0;
  std::vector<std::size_t> points;  // the class of base
  std::vector<double> weights;      // lambda_base(y) for y in points
};

/// lambda_x(y) = (d lambda/d mu)(y) Delta(x, y) over the class of x.
LeafwiseMeasure leafwise_measure(const FiniteEqRel& rel, const Measure& lambda, std::size_t x);

struct StationarityReport {
  bool global = false;     // lambda P = lambda
  double global_residual = 0.0;  // sum_y |lambda P(y) - lambda(y)|
  bool leafwise = false;   // every lambda_x is stationary for p on its class
  double leafwise_residual = 0.0;  // max over x of sum_y |lambda_x P(y) - lambda_x(y)|
  bool agree = false;
};

/// Both criteria compare pointwise with relative tolerance, so the verdicts do
/// not depend on the scale of lambda.
StationarityReport stationarity_check(const FiniteEqRel& rel, const Measure& lambda, double tolerance = 1e-9);

/// A stationary measure with the given mass on each class (solved exactly per
/// class by Gaussian elimination). Requires each class to be irreducible.
Measure stationary_measure(const FiniteEqRel& rel, double class_mass = 1.0);

/// deg * mu.
Measure degree_measure(const FiniteEqRel& rel);

/// p_check(y, x) = p(x, y) lambda(x)/lambda(y). Throws NotStationary unless
/// lambda is stationary, std::invalid_argument unless lambda is positive.
SquareMatrix cotransition(const FiniteEqRel& rel, const Measure& lambda);

struct ReversibilityReport {
  bool reversible = false;
  double max_violation = 0.0;  // max |p_check - p|
  /// max |lambda(x) p(x,y) - (lambda P)(y) p_check(y,x)|
  double detailed_balance = 0.0;
};

ReversibilityReport reversibility_check(const FiniteEqRel& rel, const Measure& lambda, double tolerance = 1e-12);

/// sum_{x,y} lambda(x) p(x, y) c(x, y): the expectation of c under the joint law
/// of two consecutive positions started from lambda.
double cocycle_expectation(const FiniteEqRel& rel, const Measure& lambda, const SquareMatrix& c);

/// H_0..H_{n_max}: entropies of pi_x^n averaged over lambda normalized to mass 1.
std::vector<double> average_entropies(const FiniteEqRel& rel, const Measure& lambda, std::size_t n_max);

struct ConditionalEntropy {
  std::size_t k = 0;
  std::size_t n = 0;
  double lhs = 0.0;  // by path enumeration
  double rhs = 0.0;  // k H_1 + H_{n-k} - H_n
  double diff = 0.0;
  std::size_t paths = 0;
};

/// Conditional entropy of (x_1..x_k) given (x_0, x_n) under the stationary
/// path measure, computed by enumerating all paths of length n. Throws
/// BudgetExceeded if size()^n exceeds `max_terms`, NotStationary if lambda is
/// not stationary.
ConditionalEntropy conditional_entropy_identity(const FiniteEqRel& rel, const Measure& lambda, std::size_t k,
                                                std::size_t n, std::size_t max_terms = 10'000'000);

/// ||pi_x^n - pi_x^{n+1}|| (total mass of the difference, in [0, 2]) per point.
/// Diagnostic only: finite reducible models can take intermediate values.
std::vector<double> phi_diagnostic(const FiniteEqRel& rel, std::size_t n);

/// Random relation with 1..max_points points, random classes, mu and a kernel
/// that is irreducible on every class.
FiniteEqRel random_relation(std::uint64_t seed, std::size_t max_points = 8);
/// Random graphed relation with connected classes of size >= 2, mu constant on
/// each class (hence invariant) and the simple-walk kernel.
FiniteEqRel random_graphed_relation(std::uint64_t seed, std::size_t max_points = 8);
/// Positive random measure (some points may get small weight, none zero).
Measure random_measure(std::uint64_t seed, std::size_t n);
/// Random antisymmetric c(x, y) = -c(y, x) within classes.
SquareMatrix random_antisymmetric(std::uint64_t seed, const FiniteEqRel& rel);

/// Line-oriented descriptor:
///   points N
///   classes l_0 ... l_{N-1}
///   mu m_0 ... m_{N-1}
///   row i p(i,0) ... p(i,N-1)      (one per point, or "kernel simple")
///   edge i j                       (optional, repeatable)
///   lambda l_0 ... l_{N-1}         (optional measure to test)
/// '#' starts a comment. Errors are ParseError "source:line: message".
struct RelationFile {
  FiniteEqRel relation;
  std::optional<Measure> lambda;
};

RelationFile read_relation(std::istream& in, const std::string& source = "<input>");
RelationFile load_relation(const std::string& path);
void write_relation(std::ostream& out, const FiniteEqRel& rel, const Measure* lambda = nullptr);

/// Every check run against one relation.
struct RelationVerification {
  std::size_t points = 0;
  std::size_t classes = 0;
  double cocycle_multiplicativity = 0.0;  // max |Delta(x,z) - Delta(x,y) Delta(y,z)|
  double density_formula = 0.0;           // MarkovImage::max_diff for the tested lambda
  StationarityReport tested;              // for the supplied or random lambda
  StationarityReport stationary;          // for the solved stationary measure
  std::optional<StationarityReport> degree;  // deg * mu, graphed relations with invariant mu
  ReversibilityReport reversibility;
  double cocycle_expectation = 0.0;       // random antisymmetric cocycle, meaningful when reversible
  std::vector<ConditionalEntropy> identities;
  bool monotone = false;  // H(alpha_1 | alpha_0 v alpha_n) nondecreasing in n
  std::vector<double> phi;  // max over points of phi_diagnostic(n), n = 1..n_max
  bool passed = false;
};

/// Runs the battery with conditional-entropy identities for all 1 <= k <= n <= n_max
/// that fit in the enumeration budget.
RelationVerification verify_relation(const FiniteEqRel& rel, const std::optional<Measure>& lambda,
                                     std::uint64_t seed, std::size_t n_max = 4, std::size_t max_terms = 10'000'000);

}  // namespace horo
