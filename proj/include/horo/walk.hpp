#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "horo/horoprod.hpp"
#include "horo/product_graph.hpp"
#include "horo/random.hpp"

namespace horo {

/// Nearest-neighbor transition kernel on T ⋈ T'. An optional holding
/// probability keeps the walk in place; with hold = 1 the walk never moves.
class Kernel {
 public:
  enum class Kind { simple, height_biased, custom };
  /// Weight of a move out of a vertex; normalized per vertex.
  using WeightFn = std::function<double(const ProductVertex& from, Move m)>;

  static Kernel simple(double hold = 0.0);
  /// Probability `up` to raise the height, spread uniformly over the up moves.
  static Kernel height_biased(double up, double hold = 0.0);
  static Kernel custom(WeightFn weight, std::string label = "custom", double hold = 0.0);
  /// Custom kernel giving each down move weight `down` and each up move weight `up`.
  static Kernel move_weights(double down, double up, double hold = 0.0);

  Kind kind() const noexcept { return kind_; }
  double up_probability() const noexcept { return up_; }
  double hold() const noexcept { return hold_; }
  const std::string& label() const noexcept { return label_; }
  /// True if the weights depend only on move kind and degrees (no vertex lookup needed).
  bool local() const noexcept { return kind_ != Kind::custom || !weight_; }
  double down_weight() const noexcept { return down_w_; }
  double up_weight() const noexcept { return up_w_; }

  /// Move probabilities aligned with moves(envs, v), before holding. `from`
  /// is only consulted by custom weight functions. Throws DegenerateKernel.
  void move_probabilities(ChildIndex down, ChildIndex up, const ProductVertex* from, std::vector<double>& out) const;

  /// Draws the next move index into moves(...) order, or -1 for holding.
  std::int32_t sample(ChildIndex down, ChildIndex up, const ProductVertex& from, SplitMix64& rng) const;

 private:
  Kind kind_ = Kind::simple;
  double up_ = 0.5;
  double hold_ = 0.0;
  double down_w_ = 1.0;
  double up_w_ = 1.0;
  WeightFn weight_;
  std::string label_ = "simple";
};

/// One-step law from X in move order; a holding entry (X itself) comes last when hold > 0.
std::vector<std::pair<ProductVertex, double>> step_distribution(const ProductEnv& envs, const Kernel& kernel,
                                                                const ProductVertex& x);

/// Expected height increment from X under the kernel.
double expected_height_increment(const ProductEnv& envs, const Kernel& kernel, const ProductVertex& x);

/// Streaming sampler: the walk state plus its own generator.
class Walker {
 public:
  Walker(const ProductEnv& envs, const Kernel& kernel, ProductVertex start, std::uint64_t seed);

  const ProductVertex& current() const noexcept { return current_; }
  std::size_t steps() const noexcept { return steps_; }
  /// Takes one step; returns the move index taken or -1 when holding.
  std::int32_t step();

 private:
  const ProductEnv* envs_;
  const Kernel* kernel_;
  ProductVertex current_;
  SplitMix64 rng_;
  std::size_t steps_ = 0;
};

/// A sampled trajectory stored as its move indices (-1 = stayed put), which
/// replays to the visited vertices.
struct WalkPath {
  ProductVertex start;
  std::vector<std::int32_t> moves;
  std::uint64_t seed = 0;

  std::size_t length() const noexcept { return moves.size(); }
  std::vector<ProductVertex> vertices(const ProductEnv& envs) const;
  ProductVertex end(const ProductEnv& envs) const;
};

WalkPath sample_path(const ProductEnv& envs, const Kernel& kernel, const ProductVertex& start, std::size_t n,
                     std::uint64_t seed);

/// CSV `step,height,distance_from_start,vertex`, one row per visited vertex.
void write_path_csv(std::ostream& out, const ProductEnv& envs, const WalkPath& path);
/// CSV `vertex,prob` in the given order.
void write_distribution_csv(std::ostream& out, const std::vector<std::pair<ProductVertex, double>>& law);

/// Seed of walk `index` in a batch seeded with `seed`.
inline std::uint64_t walk_seed(std::uint64_t seed, std::uint64_t index) noexcept { return hash_combine(seed, index); }

/// Exact laws p^n(start, .) by forward dynamic programming over interned
/// vertices. Levels are kept sorted by key, so results do not depend on hash
/// iteration order.
class NStepDistribution {
 public:
  using Level = std::vector<std::pair<ProductIndex::Key, double>>;

  NStepDistribution(const ProductEnv& envs, Kernel kernel, const ProductVertex& start,
                    std::size_t budget = 2'000'000);

  /// Computes levels up to n. Throws BudgetExceeded when a support exceeds the budget.
  void extend_to(std::size_t n);
  std::size_t computed() const noexcept { return levels_.size() - 1; }

  const Level& level(std::size_t n) const { return levels_.at(n); }
  double probability(std::size_t n, const ProductVertex& v) const;
  std::vector<std::pair<ProductVertex, double>> distribution(std::size_t n) const;
  /// Shannon entropy in nats.
  double entropy(std::size_t n) const;
  double total(std::size_t n) const;
  std::size_t support(std::size_t n) const { return level(n).size(); }
  const ProductIndex& index() const noexcept { return index_; }

 private:
  Kernel kernel_;
  ProductIndex index_;
  std::size_t budget_;
  std::vector<Level> levels_;
};

/// The tree walk on T obtained by projecting the simple walk on T ⋈ T_{d+1}:
/// parent with probability d/(c+d), each of the c children with 1/(c+d).
class HomesickKernel {
 public:
  HomesickKernel(const PointedTreeEnv& env, ChildIndex d);

  double parent_probability(const TreeVertexAddr& x) const;
  double child_probability(const TreeVertexAddr& x) const;
  /// Parent first, then children in index order.
  std::vector<std::pair<TreeVertexAddr, double>> distribution(const TreeVertexAddr& x) const;

 private:
  const PointedTreeEnv* env_;
  ChildIndex d_;
};

HomesickKernel homesick_projection_kernel(const PointedTreeEnv& env, ChildIndex d);

}  // namespace horo
