#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "horo/tree.hpp"

namespace horo {

struct Move;

/// The two pointed trees T and T' whose horospheric product is taken.
struct ProductEnv {
  PointedTreeEnv tree;
  PointedTreeEnv tree_prime;
};

/// DL(p, q): T with p children per vertex, T' with q children per vertex.
ProductEnv homogeneous_product(ChildIndex p, ChildIndex q);

/// A vertex (x, x') of T ⋈ T'. Tree heights cancel: height(x) + height(x') = 0,
/// i.e. b(x) + b'(x') = 0; the product height is height(x).
class ProductVertex {
 public:
  ProductVertex() = default;
  /// Throws InconsistentHeights if the heights do not cancel.
  ProductVertex(TreeVertexAddr x, TreeVertexAddr x_prime);

  static ProductVertex origin() { return {}; }

  const TreeVertexAddr& x() const noexcept { return x_; }
  const TreeVertexAddr& x_prime() const noexcept { return x_prime_; }
  Height height() const noexcept { return x_.height(); }

  friend bool operator==(const ProductVertex&, const ProductVertex&) = default;
  friend std::strong_ordering operator<=>(const ProductVertex& a, const ProductVertex& b) noexcept {
    if (auto c = a.x_ <=> b.x_; c != 0) return c;
    return a.x_prime_ <=> b.x_prime_;
  }

 private:
  friend void apply_move(const ProductEnv&, ProductVertex&, Move);

  TreeVertexAddr x_;
  TreeVertexAddr x_prime_;
};

struct ProductVertexHash {
  std::size_t operator()(const ProductVertex& v) const noexcept {
    return static_cast<std::size_t>(hash_combine(v.x().key(), v.x_prime().key()));
  }
};

std::string to_string(const ProductVertex& v);
/// Parses `(<addr>|<addr>)`.
ProductVertex parse_product_vertex(std::string_view text);

/// One edge out of a product vertex. `down`: x to its child `index`, x' to its
/// parent (height -1). `up`: x to its parent, x' to its child `index` (height +1).
struct Move {
  enum class Kind : std::uint8_t { down, up };
  Kind kind;
  ChildIndex index;

  friend bool operator==(const Move&, const Move&) = default;
};

/// Moves in the fixed neighbor order: all down moves, then all up moves.
std::vector<Move> moves(const ProductEnv& envs, const ProductVertex& v);
void apply_move(const ProductEnv& envs, ProductVertex& v, Move m);
ProductVertex moved(const ProductEnv& envs, ProductVertex v, Move m);

/// Neighbors in the order of `moves`; count = offspring(x) + offspring'(x').
std::vector<ProductVertex> neighbors(const ProductEnv& envs, const ProductVertex& v);
bool adjacent(const ProductEnv& envs, const ProductVertex& a, const ProductVertex& b);

/// B(X, Y) = beta_T(x, y); cross-checked against -beta_T'(x', y').
std::int64_t height_cocycle(const ProductEnv& envs, const ProductVertex& a, const ProductVertex& b);

/// d(X, Y) = d(x, y) + d(x', y') - |B(X, Y)|.
std::int64_t product_distance(const ProductVertex& a, const ProductVertex& b);

enum class GeodesicCase {
  rising,   // height(X) < height(Y)
  falling,  // height(X) > height(Y)
  level,    // equal heights
};

/// Shape of the height profile of a geodesic. `descend_first` drops from
/// height(X) to the level of x' ⋏ y', climbs to the level of x ⋏ y, then
/// drops to height(Y); `ascend_first` is the mirror image. Rising pairs only
/// admit descend_first, falling pairs only ascend_first, level pairs both.
enum class GeodesicOrder { descend_first, ascend_first };

GeodesicCase geodesic_case(const ProductVertex& a, const ProductVertex& b);
const char* case_label(GeodesicCase c);

/// Free parameters of a geodesic. For descend_first, `z` is a descendant of x
/// at the level of x' ⋏ y' and `z_prime` a descendant of y' at the level of
/// x ⋏ y. For ascend_first, `z_prime` descends from x' and `z` from y.
/// Unset fields default to the child-0 descendant.
struct GeodesicChoice {
  std::optional<GeodesicOrder> order;
  std::optional<TreeVertexAddr> z;
  std::optional<TreeVertexAddr> z_prime;
};

/// A shortest path from `a` to `b` (both endpoints included). Throws
/// InvalidChoice if the order is not admissible for the pair or z / z' is
/// not a descendant of the required vertex at the required height.
std::vector<ProductVertex> geodesic_segment(const ProductEnv& envs, const ProductVertex& a,
                                            const ProductVertex& b, const GeodesicChoice& choice = {});

struct GeodesicEnumeration {
  GeodesicCase gcase = GeodesicCase::level;
  std::vector<std::vector<ProductVertex>> paths;  // sorted, distinct
  bool truncated = false;
};

/// Every geodesic between `a` and `b`, obtained by ranging over all admissible
/// (order, z, z') choices. Stops after `max_count` paths and sets `truncated`.
GeodesicEnumeration enumerate_geodesics(const ProductEnv& envs, const ProductVertex& a, const ProductVertex& b,
                                        std::size_t max_count = 100'000);

/// Number of geodesics predicted by counting descendants, without building paths.
std::size_t count_geodesics(const ProductEnv& envs, const ProductVertex& a, const ProductVertex& b,
                            std::size_t limit = 1'000'000);

bool is_path(const ProductEnv& envs, const std::vector<ProductVertex>& path);

}  // namespace horo

template <>
struct std::hash<horo::ProductVertex> : horo::ProductVertexHash {};
