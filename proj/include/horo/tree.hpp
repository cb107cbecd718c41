#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "horo/random.hpp"

namespace horo {

using Height = std::int64_t;
using ChildIndex = std::uint32_t;

/// Address of a vertex in a locally finite tree pointed at infinity.
///
/// The tree carries a root `o` and a distinguished end `gamma`; the ray
/// [o, gamma) is the spine s_0 = o, s_1, s_2, ... An address is the pair
/// (k, w): start at the spine vertex s_k and descend along the child
/// indices in w. The canonical form requires that, for k > 0 and nonempty w,
/// the first index differs from the position of s_{k-1} among the children
/// of s_k; `PointedTreeEnv` only ever produces canonical addresses.
///
/// height(x) = k - |w|, so the parent sits one level higher and the
/// Busemann function b(x) = beta_gamma(o, x) is -height(x).
class TreeVertexAddr {
 public:
  TreeVertexAddr() = default;
  TreeVertexAddr(std::int64_t spine_depth, std::vector<ChildIndex> descent);

  static TreeVertexAddr root() { return {}; }
  static TreeVertexAddr spine(std::int64_t k) { return TreeVertexAddr(k, {}); }

  std::int64_t spine_depth() const noexcept { return k_; }
  std::span<const ChildIndex> descent() const noexcept { return descent_; }
  std::size_t depth() const noexcept { return descent_.size(); }
  bool on_spine() const noexcept { return descent_.empty(); }

  Height height() const noexcept { return k_ - static_cast<Height>(descent_.size()); }
  std::int64_t busemann() const noexcept { return -height(); }

  /// Structural hash of the address (independent of any environment seed).
  std::uint64_t key() const noexcept { return descent_.empty() ? base_key(k_) : keys_.back(); }

  /// The ancestor obtained by keeping the first `len` descent steps.
  TreeVertexAddr truncated(std::size_t len) const;

  friend bool operator==(const TreeVertexAddr& a, const TreeVertexAddr& b) noexcept {
    return a.k_ == b.k_ && a.descent_ == b.descent_;
  }
  friend std::strong_ordering operator<=>(const TreeVertexAddr& a, const TreeVertexAddr& b) noexcept;

 private:
  friend class PointedTreeEnv;

  static std::uint64_t base_key(std::int64_t k) noexcept {
    return mix64(0x243F6A8885A308D3ULL ^ (static_cast<std::uint64_t>(k) * 0x9E3779B97F4A7C15ULL));
  }
  void push_child(ChildIndex i);
  void pop_child() noexcept;
  void reset_to_spine(std::int64_t k) noexcept;

  std::int64_t k_ = 0;
  std::vector<ChildIndex> descent_;
  std::vector<std::uint64_t> keys_;  // keys_[j]: key of the prefix of length j+1
};

std::string to_string(const TreeVertexAddr& x);
/// Parses `k:[i1,i2,...]`. Throws ParseError on malformed input.
TreeVertexAddr parse_tree_vertex(std::string_view text);

struct TreeVertexAddrHash {
  std::size_t operator()(const TreeVertexAddr& x) const noexcept { return static_cast<std::size_t>(x.key()); }
};

enum class EnvKind { homogeneous, galton_watson };

/// Deterministic lazy environment: assigns each vertex its offspring count as a
/// pure function of (master seed, canonical address). Spine vertices draw from
/// the same law; the position of the spine continuation among the children of
/// s_k is a seeded uniform choice (always 0 for homogeneous trees).
class PointedTreeEnv {
 public:
  static PointedTreeEnv homogeneous(ChildIndex children, std::string label = {});
  /// `offspring_probs[i]` is the probability of i+1 children.
  static PointedTreeEnv galton_watson(std::vector<double> offspring_probs, std::uint64_t seed,
                                      std::string label = {});

  EnvKind kind() const noexcept { return kind_; }
  const std::string& label() const noexcept { return label_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const std::vector<double>& offspring_probs() const noexcept { return probs_; }
  ChildIndex max_offspring() const noexcept;
  double mean_offspring() const noexcept;
  bool is_homogeneous() const noexcept { return kind_ == EnvKind::homogeneous; }

  ChildIndex offspring(const TreeVertexAddr& x) const noexcept;
  /// Index of s_{k-1} among the children of s_k, k >= 1.
  ChildIndex spine_child_index(std::int64_t k) const noexcept;
  /// Index of x among the children of its parent.
  ChildIndex index_in_parent(const TreeVertexAddr& x) const noexcept;

  TreeVertexAddr parent(const TreeVertexAddr& x) const;
  TreeVertexAddr child(const TreeVertexAddr& x, ChildIndex i) const;
  std::vector<TreeVertexAddr> children(const TreeVertexAddr& x) const;

  /// In-place moves; these keep the address canonical.
  void ascend(TreeVertexAddr& x) const;
  void descend(TreeVertexAddr& x, ChildIndex i) const;

  bool is_canonical(const TreeVertexAddr& x) const noexcept;
  /// Throws std::invalid_argument if `x` is not a canonical address here.
  void validate(const TreeVertexAddr& x) const;

 private:
  PointedTreeEnv() = default;
  ChildIndex draw_offspring(std::uint64_t r) const noexcept;

  EnvKind kind_ = EnvKind::homogeneous;
  ChildIndex children_ = 2;
  std::vector<double> probs_;
  CumulativeThresholds law_;
  std::uint64_t seed_ = 0;
  std::uint64_t seed_key_ = 0;
  std::string label_;
};

/// First common vertex of the rays [x, gamma) and [y, gamma).
TreeVertexAddr confluence(const TreeVertexAddr& x, const TreeVertexAddr& y);
/// beta_gamma(x, y) = d(y, z) - d(x, z), z the confluence.
std::int64_t busemann(const TreeVertexAddr& x, const TreeVertexAddr& y);
std::int64_t tree_distance(const TreeVertexAddr& x, const TreeVertexAddr& y);
/// The unique geodesic x -> confluence -> y, both endpoints included.
std::vector<TreeVertexAddr> tree_geodesic(const PointedTreeEnv& env, const TreeVertexAddr& x,
                                          const TreeVertexAddr& y);
/// True iff `ancestor` lies on the ray [v, gamma) (every vertex is its own descendant).
bool is_descendant(const TreeVertexAddr& v, const TreeVertexAddr& ancestor);
TreeVertexAddr ancestor(const PointedTreeEnv& env, TreeVertexAddr x, std::int64_t steps);
/// All descendants of x exactly `depth` levels below, in lexicographic child order.
/// Throws BudgetExceeded past `limit` results.
std::vector<TreeVertexAddr> descendants_at_depth(const PointedTreeEnv& env, const TreeVertexAddr& x,
                                                 std::int64_t depth, std::size_t limit = 1'000'000);
/// Canonical descendant `depth` levels below x via child 0 at each step.
TreeVertexAddr first_descendant(const PointedTreeEnv& env, TreeVertexAddr x, std::int64_t depth);

/// A point of the punctured boundary: the geodesic ray descending from
/// `anchor` along `prefix`, then by `rule` forever.
class End {
 public:
  enum class TailRule { first_child, seeded };

  End() = default;
  explicit End(TreeVertexAddr anchor, std::vector<ChildIndex> prefix = {},
               TailRule rule = TailRule::first_child, std::uint64_t tail_seed = 0);

  const TreeVertexAddr& anchor() const noexcept { return anchor_; }
  const std::vector<ChildIndex>& prefix() const noexcept { return prefix_; }
  TailRule rule() const noexcept { return rule_; }
  std::uint64_t tail_seed() const noexcept { return tail_seed_; }

  /// Child index taken at step `step` (0-based, counted from the anchor) out of vertex `at`.
  ChildIndex index_at(const PointedTreeEnv& env, std::size_t step, const TreeVertexAddr& at) const;

 private:
  TreeVertexAddr anchor_;
  std::vector<ChildIndex> prefix_;
  TailRule rule_ = TailRule::first_child;
  std::uint64_t tail_seed_ = 0;
};

/// Walks down the ray of an end, one vertex per `advance`.
class EndCursor {
 public:
  EndCursor(const PointedTreeEnv& env, End end);

  const TreeVertexAddr& current() const noexcept { return current_; }
  std::size_t step() const noexcept { return step_; }
  void advance();
  /// Advance until `step() == target` (no-op if already there or beyond).
  void advance_to(std::size_t target);

 private:
  const PointedTreeEnv* env_;
  End end_;
  TreeVertexAddr current_;
  std::size_t step_ = 0;
};

/// Vertex at height `h` on the bilateral geodesic (end, gamma).
TreeVertexAddr end_vertex_at_height(const PointedTreeEnv& env, const End& end, Height h);
/// First common vertex of [x, gamma) and the bilateral geodesic (end, gamma).
TreeVertexAddr confluence_with_end(const PointedTreeEnv& env, const TreeVertexAddr& x, const End& end);

/// Lazy geodesic ray: a finite vertex list followed by an infinite tail that
/// either climbs toward gamma or follows an end.
class TreeRay {
 public:
  /// The ray [from, gamma).
  static TreeRay toward_gamma(const PointedTreeEnv& env, TreeVertexAddr from);
  /// The ray [from, end).
  static TreeRay toward_end(const PointedTreeEnv& env, const TreeVertexAddr& from, const End& end);
  /// `path` (consecutive vertices) followed by [path.back(), gamma).
  static TreeRay path_then_gamma(const PointedTreeEnv& env, std::vector<TreeVertexAddr> path);

  const TreeVertexAddr& current() const noexcept { return current_; }
  std::size_t position() const noexcept { return position_; }
  void advance();

 private:
  TreeRay(const PointedTreeEnv& env, std::vector<TreeVertexAddr> prefix, std::optional<EndCursor> tail);

  const PointedTreeEnv* env_;
  std::vector<TreeVertexAddr> prefix_;
  std::optional<EndCursor> tail_;
  TreeVertexAddr current_;
  std::size_t position_ = 0;
};

/// First n+1 vertices of [from, end).
std::vector<TreeVertexAddr> end_ray(const PointedTreeEnv& env, const End& end, const TreeVertexAddr& from,
                                    std::size_t n);

}  // namespace horo

template <>
struct std::hash<horo::TreeVertexAddr> : horo::TreeVertexAddrHash {};
