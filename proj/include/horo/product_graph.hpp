#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "horo/horoprod.hpp"
#include "horo/tree_index.hpp"

namespace horo {

/// Interned view of T ⋈ T': a product vertex is the pair of its tree ids,
/// packed as (id in T) << 32 | (id in T'). Single-consumer.
class ProductIndex {
 public:
  using Key = std::uint64_t;

  explicit ProductIndex(const ProductEnv& envs);

  Key intern(const ProductVertex& v);
  std::optional<Key> find(const ProductVertex& v) const;
  ProductVertex vertex(Key k) const;
  Height height(Key k) const { return lower_.height(lower_id(k)); }
  std::size_t degree(Key k) const { return lower_.offspring(lower_id(k)) + upper_.offspring(upper_id(k)); }

  /// Neighbor keys in move order (down moves, then up moves), appended to `out`.
  void neighbors(Key k, std::vector<Key>& out);
  Key apply(Key k, Move m);

  TreeIndex& lower() noexcept { return lower_; }
  TreeIndex& upper() noexcept { return upper_; }
  const TreeIndex& lower() const noexcept { return lower_; }
  const TreeIndex& upper() const noexcept { return upper_; }

  static Key pack(TreeIndex::Id a, TreeIndex::Id b) noexcept { return (Key{a} << 32) | b; }
  static TreeIndex::Id lower_id(Key k) noexcept { return static_cast<TreeIndex::Id>(k >> 32); }
  static TreeIndex::Id upper_id(Key k) noexcept { return static_cast<TreeIndex::Id>(k & 0xFFFFFFFFu); }

 private:
  TreeIndex lower_;
  TreeIndex upper_;
};

/// A ball in BFS order with its induced adjacency in compressed rows.
struct Ball {
  std::vector<ProductIndex::Key> keys;  // keys[0] is the center
  std::vector<std::int32_t> distance;   // from the center
  std::vector<std::uint32_t> row_start;  // size keys.size() + 1
  std::vector<std::uint32_t> columns;    // neighbor positions inside the ball
  std::unordered_map<ProductIndex::Key, std::uint32_t> position;

  std::size_t size() const noexcept { return keys.size(); }
};

/// BFS ball of the given radius around `center`. Throws BudgetExceeded once
/// more than `budget` vertices are discovered.
Ball materialize_ball(ProductIndex& index, ProductIndex::Key center, int radius, std::size_t budget = 4'000'000);

/// BFS distances from ball position `source`, restricted to the ball. -1 marks
/// unreached vertices. Stops early after reaching every position flagged in
/// `targets` (if given).
std::vector<std::int32_t> ball_bfs(const Ball& ball, std::uint32_t source,
                                   const std::vector<std::uint32_t>* targets = nullptr);

/// Writes `vertex,distance` rows.
void write_ball_csv(std::ostream& out, const ProductIndex& index, const Ball& ball);

/// For homogeneous trees: the image of Y under an automorphism of T ⋈ T' that
/// fixes both distinguished ends and sends X to the origin.
ProductVertex translate_to_origin(const ProductEnv& envs, const ProductVertex& x, const ProductVertex& y);

struct DistanceMismatch {
  std::string a;
  std::string b;
  std::int64_t formula = 0;
  std::int64_t bfs = 0;
};

struct DistanceReport {
  int radius = 0;
  std::size_t ball_size = 0;
  std::size_t pairs_checked = 0;
  std::size_t mismatches = 0;
  std::vector<DistanceMismatch> examples;  // first few mismatches
  std::string method;
  bool passed() const noexcept { return mismatches == 0; }
};

/// Compares the distance formula with BFS distance for every ordered pair in
/// the radius-R ball around the origin. Homogeneous products use one BFS to
/// radius 2R plus translation; other products run one BFS per source inside
/// the radius-2R ball, which contains every geodesic between points of the
/// radius-R ball.
DistanceReport verify_distance_formula(const ProductEnv& envs, int radius, std::size_t budget = 4'000'000);

}  // namespace horo
