#include "horo/product_graph.hpp"

#include <deque>
#include <stdexcept>

#include "horo/errors.hpp"

namespace horo {

ProductIndex::ProductIndex(const ProductEnv& envs) : lower_(envs.tree), upper_(envs.tree_prime) {}

ProductIndex::Key ProductIndex::intern(const ProductVertex& v) {
  return pack(lower_.intern(v.x()), upper_.intern(v.x_prime()));
}

std::optional<ProductIndex::Key> ProductIndex::find(const ProductVertex& v) const {
  const auto a = lower_.find(v.x());
  if (!a) return std::nullopt;
  const auto b = upper_.find(v.x_prime());
  if (!b) return std::nullopt;
  return pack(*a, *b);
}

ProductVertex ProductIndex::vertex(Key k) const {
  return ProductVertex(lower_.addr(lower_id(k)), upper_.addr(upper_id(k)));
}

ProductIndex::Key ProductIndex::apply(Key k, Move m) {
  if (m.kind == Move::Kind::down) return pack(lower_.child(lower_id(k), m.index), upper_.parent(upper_id(k)));
  return pack(lower_.parent(lower_id(k)), upper_.child(upper_id(k), m.index));
}

void ProductIndex::neighbors(Key k, std::vector<Key>& out) {
  const ChildIndex down = lower_.offspring(lower_id(k));
  const ChildIndex up = upper_.offspring(upper_id(k));
  for (ChildIndex i = 0; i < down; ++i) out.push_back(apply(k, {Move::Kind::down, i}));
  for (ChildIndex j = 0; j < up; ++j) out.push_back(apply(k, {Move::Kind::up, j}));
}

Ball materialize_ball(ProductIndex& index, ProductIndex::Key center, int radius, std::size_t budget) {
  Ball ball;
  ball.keys.push_back(center);
  ball.distance.push_back(0);
  ball.position.emplace(center, 0);
  std::vector<ProductIndex::Key> nbrs;
  for (std::size_t head = 0; head < ball.keys.size(); ++head) {
    if (ball.distance[head] >= radius) continue;
    nbrs.clear();
    index.neighbors(ball.keys[head], nbrs);
    for (auto k : nbrs) {
      if (ball.position.contains(k)) continue;
      if (ball.keys.size() >= budget)
        throw BudgetExceeded("ball of radius " + std::to_string(radius) + " exceeds " + std::to_string(budget) +
                             " vertices; lower the radius or raise --budget");
      ball.position.emplace(k, static_cast<std::uint32_t>(ball.keys.size()));
      ball.keys.push_back(k);
      ball.distance.push_back(ball.distance[head] + 1);
    }
  }
  ball.row_start.reserve(ball.keys.size() + 1);
  ball.row_start.push_back(0);
  for (auto k : ball.keys) {
    nbrs.clear();
    index.neighbors(k, nbrs);
    for (auto n : nbrs)
      if (auto it = ball.position.find(n); it != ball.position.end()) ball.columns.push_back(it->second);
    ball.row_start.push_back(static_cast<std::uint32_t>(ball.columns.size()));
  }
  return ball;
}

std::vector<std::int32_t> ball_bfs(const Ball& ball, std::uint32_t source, const std::vector<std::uint32_t>* targets) {
  std::vector<std::int32_t> dist(ball.size(), -1);
  std::size_t remaining = 0;
  std::vector<char> wanted;
  if (targets) {
    wanted.assign(ball.size(), 0);
    for (auto t : *targets)
      if (!wanted[t]) {
        wanted[t] = 1;
        ++remaining;
      }
  }
  std::vector<std::uint32_t> queue;
  queue.reserve(ball.size());
  dist[source] = 0;
  queue.push_back(source);
  if (targets && wanted[source]) --remaining;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    if (targets && remaining == 0) break;
    const auto u = queue[head];
    for (auto e = ball.row_start[u]; e < ball.row_start[u + 1]; ++e) {
      const auto v = ball.columns[e];
      if (dist[v] >= 0) continue;
      dist[v] = dist[u] + 1;
      queue.push_back(v);
      if (targets && wanted[v]) --remaining;
    }
  }
  return dist;
}

void write_ball_csv(std::ostream& out, const ProductIndex& index, const Ball& ball) {
  out << "vertex,distance\n";
  for (std::size_t i = 0; i < ball.size(); ++i)
    out << '"' << to_string(index.vertex(ball.keys[i])) << "\"," << ball.distance[i] << '\n';
}

namespace {

// Child indices leading from the ancestor `a` down to `v` (homogeneous spine index 0).
std::vector<ChildIndex> word_below(const TreeVertexAddr& a, const TreeVertexAddr& v) {
  std::vector<ChildIndex> w;
  const auto d = v.descent();
  if (a.on_spine() && a.spine_depth() >= v.spine_depth()) {
    w.assign(static_cast<std::size_t>(a.spine_depth() - v.spine_depth()), 0);
    w.insert(w.end(), d.begin(), d.end());
  } else {
    w.assign(d.begin() + static_cast<std::ptrdiff_t>(a.depth()), d.end());
  }
  return w;
}

TreeVertexAddr translate_tree(const PointedTreeEnv& env, const TreeVertexAddr& x, const TreeVertexAddr& y) {
  const TreeVertexAddr a = confluence(x, y);
  const Height up = a.height() - x.height();
  const auto w = word_below(a, y);
  TreeVertexAddr image = TreeVertexAddr::spine(up);
  if (w.empty()) return image;
  ChildIndex first = w[0];
  if (up > 0) {
    const ChildIndex e = word_below(a, x).front();
    if (first == e) first = 0;
    else if (first == 0) first = e;
  }
  env.descend(image, first);
  for (std::size_t i = 1; i < w.size(); ++i) env.descend(image, w[i]);
  return image;
}

}  // namespace

ProductVertex translate_to_origin(const ProductEnv& envs, const ProductVertex& x, const ProductVertex& y) {
  if (!envs.tree.is_homogeneous() || !envs.tree_prime.is_homogeneous())
    throw std::invalid_argument("translation needs homogeneous trees");
  return ProductVertex(translate_tree(envs.tree, x.x(), y.x()), translate_tree(envs.tree_prime, x.x_prime(), y.x_prime()));
}

DistanceReport verify_distance_formula(const ProductEnv& envs, int radius, std::size_t budget) {
  DistanceReport report;
  report.radius = radius;
  if (radius < 0) throw std::invalid_argument("radius must be nonnegative");
  ProductIndex index(envs);
  const auto origin = index.intern(ProductVertex::origin());
  const Ball big = materialize_ball(index, origin, 2 * radius, budget);

  std::vector<std::uint32_t> inner;
  std::vector<ProductVertex> inner_vertices;
  for (std::uint32_t i = 0; i < big.size() && big.distance[i] <= radius; ++i) {
    inner.push_back(i);
    inner_vertices.push_back(index.vertex(big.keys[i]));
  }
  report.ball_size = inner.size();

  auto record = [&](std::size_t i, std::size_t j, std::int64_t formula, std::int64_t bfs) {
    ++report.pairs_checked;
    if (formula == bfs) return;
    ++report.mismatches;
    if (report.examples.size() < 10)
      report.examples.push_back({to_string(inner_vertices[i]), to_string(inner_vertices[j]), formula, bfs});
  };

  const bool homogeneous = envs.tree.is_homogeneous() && envs.tree_prime.is_homogeneous();
  if (homogeneous) {
    report.method = "bfs-from-origin+translation";
    for (std::size_t i = 0; i < inner.size(); ++i) {
      for (std::size_t j = 0; j < inner.size(); ++j) {
        const ProductVertex image = translate_to_origin(envs, inner_vertices[i], inner_vertices[j]);
        std::int64_t bfs = -1;
        if (auto key = index.find(image))
          if (auto it = big.position.find(*key); it != big.position.end()) bfs = big.distance[it->second];
        record(i, j, product_distance(inner_vertices[i], inner_vertices[j]), bfs);
      }
    }
  } else {
    report.method = "bfs-per-source";
    for (std::size_t i = 0; i < inner.size(); ++i) {
      const auto dist = ball_bfs(big, inner[i], &inner);
      for (std::size_t j = 0; j < inner.size(); ++j)
        record(i, j, product_distance(inner_vertices[i], inner_vertices[j]), dist[inner[j]]);
    }
  }
  return report;
}

}  // namespace horo
