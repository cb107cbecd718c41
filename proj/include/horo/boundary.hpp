#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "horo/horoprod.hpp"
#include "horo/tree.hpp"

namespace horo {

enum class BoundarySide { upper, lower };

const char* side_label(BoundarySide s);

/// Upper points are (gamma, omega') with omega' an end of T'; lower points are
/// (omega, gamma') with omega an end of T.
struct BoundaryPoint {
  BoundarySide side = BoundarySide::upper;
  End end;

  static BoundaryPoint upper(End omega_prime) { return {BoundarySide::upper, std::move(omega_prime)}; }
  static BoundaryPoint lower(End omega) { return {BoundarySide::lower, std::move(omega)}; }
};

std::string to_string(const BoundaryPoint& p);

/// Target of a geodesic ray from X. Upper form (z, omega'): z a descendant of
/// x at the product level of x' ⋏ omega'. Lower form (omega, z'): z' a
/// descendant of x' at the product level of x ⋏ omega.
struct RayTarget {
  BoundarySide side = BoundarySide::upper;
  TreeVertexAddr vertex;
  End end;

  static RayTarget upper(TreeVertexAddr z, End omega_prime) {
    return {BoundarySide::upper, std::move(z), std::move(omega_prime)};
  }
  static RayTarget lower(End omega, TreeVertexAddr z_prime) {
    return {BoundarySide::lower, std::move(z_prime), std::move(omega)};
  }
};

/// Turning vertex that makes `upper(z, omega')` or `lower(omega, z')` valid,
/// chosen via child 0.
RayTarget default_ray_target(const ProductEnv& envs, const ProductVertex& start, BoundaryPoint limit);

/// Lazy geodesic ray. Upper form: projections [x, z][z, gamma) and [x', omega').
/// Lower form: [x, omega) and [x', z'][z', gamma'). The environments must
/// outlive the ray.
class GeodesicRay {
 public:
  /// Throws InvalidTarget if the turning vertex is not a descendant of the
  /// start coordinate at the required height.
  GeodesicRay(const ProductEnv& envs, const ProductVertex& start, const RayTarget& target);

  const ProductVertex& current() const noexcept { return current_; }
  std::size_t position() const noexcept { return lower_.position(); }
  void advance();
  /// Advances n times and returns the n+1 visited vertices, current first.
  std::vector<ProductVertex> take(std::size_t n);

 private:
  TreeRay lower_;
  TreeRay upper_;
  ProductVertex current_;
};

/// The bilateral geodesic between a lower and an upper boundary point. If
/// `from` is the lower point, position i has height anchor + i; swapping the
/// inputs reverses the indexing.
class BilateralGeodesic {
 public:
  /// Throws std::invalid_argument unless the two points lie on opposite sides.
  BilateralGeodesic(const ProductEnv& envs, BoundaryPoint from, BoundaryPoint to, Height anchor = 0);

  ProductVertex at(std::int64_t i) const;
  /// Positions first, first+1, ..., first+m.
  std::vector<ProductVertex> window(std::int64_t first, std::size_t m) const;

 private:
  const ProductEnv* envs_;
  End omega_;        // in T
  End omega_prime_;  // in T'
  Height anchor_;
  int direction_;
};

enum class LimitKind { none, upper, lower };

const char* limit_label(LimitKind k);

struct LimitVerdict {
  LimitKind kind = LimitKind::none;
  /// Stabilized end (anchor plus common descent prefix) of the converging coordinate.
  std::optional<BoundaryPoint> limit;
  /// Descent indices of the converging coordinate left unchanged over the last half.
  std::size_t stabilized = 0;
  std::size_t observed = 0;
};

/// Streaming convergence test over a window of `window` vertices. A descent
/// index counts as stabilized when the anchor and that index stay unchanged
/// over the last half of the window. The verdict is upper when x' stabilizes
/// at least `depth` indices while x climbs the spine of T and the height
/// gains at least `min_rate` per step over the last half; lower is the mirror
/// image; otherwise none.
class LimitDetector {
 public:
  LimitDetector(std::size_t window, std::size_t depth, double min_rate = 0.05);

  void observe(const ProductVertex& v);
  bool full() const noexcept { return observed_ >= window_; }
  LimitVerdict verdict() const;

 private:
  struct Track {
    bool anchor_stable = true;
    std::int64_t anchor_at_half = 0;
    std::int64_t anchor_now = 0;
    std::vector<ChildIndex> reference;  // descent at the start of the last half
    std::size_t common = 0;
    void start(const TreeVertexAddr& a);
    void update(const TreeVertexAddr& a);
  };

  std::size_t window_;
  std::size_t depth_;
  double min_rate_;
  std::size_t half_start_;
  std::size_t observed_ = 0;
  Height height_at_half_ = 0;
  Height height_now_ = 0;
  Track lower_;
  Track upper_;
};

/// Classifies a finite prefix; the window is the whole prefix.
LimitVerdict classify_limit(std::span<const ProductVertex> sequence, std::size_t depth, double min_rate = 0.05);

}  // namespace horo
