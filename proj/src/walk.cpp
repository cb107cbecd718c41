#include "horo/walk.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "horo/errors.hpp"

namespace horo {

namespace {

void check_unit(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
}

Move move_at(std::int32_t index, ChildIndex down) {
  const auto i = static_cast<ChildIndex>(index);
  return i < down ? Move{Move::Kind::down, i} : Move{Move::Kind::up, i - down};
}

}  // namespace

Kernel Kernel::simple(double hold) {
  check_unit(hold, "hold");
  Kernel k;
  k.hold_ = hold;
  return k;
}

Kernel Kernel::height_biased(double up, double hold) {
  check_unit(up, "up probability");
  check_unit(hold, "hold");
  Kernel k;
  k.kind_ = Kind::height_biased;
  k.up_ = up;
  k.hold_ = hold;
  k.label_ = "height_biased";
  return k;
}

Kernel Kernel::custom(WeightFn weight, std::string label, double hold) {
  check_unit(hold, "hold");
  if (!weight) throw std::invalid_argument("custom kernel needs a weight function");
  Kernel k;
  k.kind_ = Kind::custom;
  k.weight_ = std::move(weight);
  k.label_ = std::move(label);
  k.hold_ = hold;
  return k;
}

Kernel Kernel::move_weights(double down, double up, double hold) {
  check_unit(hold, "hold");
  Kernel k;
  k.kind_ = Kind::custom;
  k.down_w_ = down;
  k.up_w_ = up;
  k.hold_ = hold;
  k.label_ = "move_weights";
  return k;
}

void Kernel::move_probabilities(ChildIndex down, ChildIndex up, const ProductVertex* from,
                                std::vector<double>& out) const {
  const std::size_t deg = down + up;
  out.assign(deg, 0.0);
  switch (kind_) {
    case Kind::simple:
      std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(deg));
      return;
    case Kind::height_biased:
      for (ChildIndex i = 0; i < down; ++i) out[i] = (1.0 - up_) / down;
      for (ChildIndex j = 0; j < up; ++j) out[down + j] = up_ / up;
      return;
    case Kind::custom:
      break;
  }
  double total = 0.0;
  for (std::size_t i = 0; i < deg; ++i) {
    double w;
    if (weight_) {
      if (!from) throw std::logic_error("custom weight function needs the vertex");
      w = weight_(*from, move_at(static_cast<std::int32_t>(i), down));
    } else {
      w = i < down ? down_w_ : up_w_;
    }
    if (!(w >= 0.0) || !std::isfinite(w)) throw DegenerateKernel("kernel weight is negative or not finite");
    out[i] = w;
    total += w;
  }
  if (!(total > 0.0)) {
    throw DegenerateKernel("kernel weights sum to zero" + (from ? " at " + to_string(*from) : std::string()));
  }
  for (auto& w : out) w /= total;
}

std::int32_t Kernel::sample(ChildIndex down, ChildIndex up, const ProductVertex& from, SplitMix64& rng) const {
  if (hold_ > 0.0) {
    if (hold_ >= 1.0 || rng() < probability_threshold(hold_)) return -1;
  }
  switch (kind_) {
    case Kind::simple:
      return static_cast<std::int32_t>(uniform_index(rng(), down + up));
    case Kind::height_biased: {
      const bool rise = up_ >= 1.0 || (up_ > 0.0 && rng() < probability_threshold(up_));
      if (rise) return static_cast<std::int32_t>(down + uniform_index(rng(), up));
      return static_cast<std::int32_t>(uniform_index(rng(), down));
    }
    case Kind::custom:
      break;
  }
  std::vector<double> probs;
  move_probabilities(down, up, &from, probs);
  return static_cast<std::int32_t>(CumulativeThresholds(probs).sample(rng()));
}

std::vector<std::pair<ProductVertex, double>> step_distribution(const ProductEnv& envs, const Kernel& kernel,
                                                                const ProductVertex& x) {
  const auto ms = moves(envs, x);
  const ChildIndex down = envs.tree.offspring(x.x());
  const ChildIndex up = envs.tree_prime.offspring(x.x_prime());
  std::vector<double> probs;
  kernel.move_probabilities(down, up, &x, probs);
  std::vector<std::pair<ProductVertex, double>> out;
  out.reserve(ms.size() + 1);
  for (std::size_t i = 0; i < ms.size(); ++i) out.emplace_back(moved(envs, x, ms[i]), (1.0 - kernel.hold()) * probs[i]);
  if (kernel.hold() > 0.0) out.emplace_back(x, kernel.hold());
  return out;
}

double expected_height_increment(const ProductEnv& envs, const Kernel& kernel, const ProductVertex& x) {
  double h = 0.0;
  for (const auto& [y, p] : step_distribution(envs, kernel, x)) h += p * static_cast<double>(y.height() - x.height());
  return h;
}

Walker::Walker(const ProductEnv& envs, const Kernel& kernel, ProductVertex start, std::uint64_t seed)
    : envs_(&envs), kernel_(&kernel), current_(std::move(start)), rng_(seed) {}

std::int32_t Walker::step() {
  const ChildIndex down = envs_->tree.offspring(current_.x());
  const ChildIndex up = envs_->tree_prime.offspring(current_.x_prime());
  const std::int32_t idx = kernel_->sample(down, up, current_, rng_);
  if (idx >= 0) apply_move(*envs_, current_, move_at(idx, down));
  ++steps_;
  return idx;
}

std::vector<ProductVertex> WalkPath::vertices(const ProductEnv& envs) const {
  std::vector<ProductVertex> out;
  out.reserve(moves.size() + 1);
  ProductVertex v = start;
  out.push_back(v);
  for (auto idx : moves) {
    if (idx >= 0) apply_move(envs, v, move_at(idx, envs.tree.offspring(v.x())));
    out.push_back(v);
  }
  return out;
}

ProductVertex WalkPath::end(const ProductEnv& envs) const {
  ProductVertex v = start;
  for (auto idx : moves)
    if (idx >= 0) apply_move(envs, v, move_at(idx, envs.tree.offspring(v.x())));
  return v;
}

WalkPath sample_path(const ProductEnv& envs, const Kernel& kernel, const ProductVertex& start, std::size_t n,
                     std::uint64_t seed) {
  WalkPath path{start, {}, seed};
  path.moves.reserve(n);
  Walker w(envs, kernel, start, seed);
  for (std::size_t i = 0; i < n; ++i) path.moves.push_back(w.step());
  return path;
}

NStepDistribution::NStepDistribution(const ProductEnv& envs, Kernel kernel, const ProductVertex& start,
                                     std::size_t budget)
    : kernel_(std::move(kernel)), index_(envs), budget_(budget) {
  levels_.push_back({{index_.intern(start), 1.0}});
}

void NStepDistribution::extend_to(std::size_t n) {
  std::vector<double> probs;
  const double move_mass = 1.0 - kernel_.hold();
  while (computed() < n) {
    const Level& prev = levels_.back();
    std::unordered_map<ProductIndex::Key, double> next;
    next.reserve(std::min(budget_, prev.size() * 4 + 16));
    for (const auto& [key, p] : prev) {
      const ChildIndex down = index_.lower().offspring(ProductIndex::lower_id(key));
      const ChildIndex up = index_.upper().offspring(ProductIndex::upper_id(key));
      if (kernel_.local()) {
        kernel_.move_probabilities(down, up, nullptr, probs);
      } else {
        const ProductVertex v = index_.vertex(key);
        kernel_.move_probabilities(down, up, &v, probs);
      }
      if (move_mass > 0.0) {
        for (std::size_t i = 0; i < probs.size(); ++i) {
          if (probs[i] <= 0.0) continue;
          next[index_.apply(key, move_at(static_cast<std::int32_t>(i), down))] += p * move_mass * probs[i];
        }
      }
      if (kernel_.hold() > 0.0) next[key] += p * kernel_.hold();
      if (next.size() > budget_)
        throw BudgetExceeded("support of p^" + std::to_string(computed() + 1) + " exceeds " +
                             std::to_string(budget_) + " vertices; lower n or raise --budget");
    }
    Level level(next.begin(), next.end());
    std::sort(level.begin(), level.end());
    levels_.push_back(std::move(level));
  }
}

double NStepDistribution::probability(std::size_t n, const ProductVertex& v) const {
  const auto key = index_.find(v);
  if (!key) return 0.0;
  const Level& lv = level(n);
  auto it = std::lower_bound(lv.begin(), lv.end(), std::make_pair(*key, -1.0));
  return it != lv.end() && it->first == *key ? it->second : 0.0;
}

std::vector<std::pair<ProductVertex, double>> NStepDistribution::distribution(std::size_t n) const {
  std::vector<std::pair<ProductVertex, double>> out;
  out.reserve(level(n).size());
  for (const auto& [key, p] : level(n)) out.emplace_back(index_.vertex(key), p);
  std::sort(out.begin(), out.end());
  return out;
}

double NStepDistribution::entropy(std::size_t n) const {
  double h = 0.0;
  for (const auto& [key, p] : level(n))
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

double NStepDistribution::total(std::size_t n) const {
  double s = 0.0;
  for (const auto& [key, p] : level(n)) s += p;
  return s;
}

HomesickKernel::HomesickKernel(const PointedTreeEnv& env, ChildIndex d) : env_(&env), d_(d) {
  if (d < 1) throw std::invalid_argument("homesick kernel needs d >= 1");
}

double HomesickKernel::parent_probability(const TreeVertexAddr& x) const {
  return static_cast<double>(d_) / static_cast<double>(env_->offspring(x) + d_);
}

double HomesickKernel::child_probability(const TreeVertexAddr& x) const {
  return 1.0 / static_cast<double>(env_->offspring(x) + d_);
}

std::vector<std::pair<TreeVertexAddr, double>> HomesickKernel::distribution(const TreeVertexAddr& x) const {
  std::vector<std::pair<TreeVertexAddr, double>> out;
  out.emplace_back(env_->parent(x), parent_probability(x));
  for (auto& c : env_->children(x)) out.emplace_back(std::move(c), child_probability(x));
  return out;
}

HomesickKernel homesick_projection_kernel(const PointedTreeEnv& env, ChildIndex d) { return HomesickKernel(env, d); }

void write_path_csv(std::ostream& out, const ProductEnv& envs, const WalkPath& path) {
  out << "step,height,distance_from_start,vertex\n";
  ProductVertex v = path.start;
  const auto row = [&](std::size_t step) {
    out << step << ',' << v.height() << ',' << product_distance(path.start, v) << ",\"" << to_string(v) << "\"\n";
  };
  row(0);
  for (std::size_t i = 0; i < path.moves.size(); ++i) {
    if (path.moves[i] >= 0) apply_move(envs, v, move_at(path.moves[i], envs.tree.offspring(v.x())));
    row(i + 1);
  }
}

void write_distribution_csv(std::ostream& out, const std::vector<std::pair<ProductVertex, double>>& law) {
  const auto precision = out.precision(17);
  out << "vertex,prob\n";
  for (const auto& [v, p] : law) out << '"' << to_string(v) << "\"," << p << '\n';
  out.precision(precision);
}

}  // namespace horo
