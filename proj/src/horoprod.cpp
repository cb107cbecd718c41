#include "horo/horoprod.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <set>
#include <stdexcept>

#include "horo/errors.hpp"

namespace horo {

ProductEnv homogeneous_product(ChildIndex p, ChildIndex q) {
  return ProductEnv{PointedTreeEnv::homogeneous(p), PointedTreeEnv::homogeneous(q)};
}

ProductVertex::ProductVertex(TreeVertexAddr x, TreeVertexAddr x_prime)
    : x_(std::move(x)), x_prime_(std::move(x_prime)) {
  if (x_.height() + x_prime_.height() != 0)
    throw InconsistentHeights("heights of " + to_string(x_) + " and " + to_string(x_prime_) + " do not cancel");
}

std::string to_string(const ProductVertex& v) {
  return "(" + to_string(v.x()) + "|" + to_string(v.x_prime()) + ")";
}

ProductVertex parse_product_vertex(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  std::string_view s = trim(text);
  if (s.size() < 2 || s.front() != '(' || s.back() != ')')
    throw ParseError("bad product vertex '" + std::string(text) + "': expected (<addr>|<addr>)");
  s = s.substr(1, s.size() - 2);
  const auto bar = s.find('|');
  if (bar == std::string_view::npos || s.find('|', bar + 1) != std::string_view::npos)
    throw ParseError("bad product vertex '" + std::string(text) + "': expected a single '|'");
  TreeVertexAddr x = parse_tree_vertex(s.substr(0, bar));
  TreeVertexAddr xp = parse_tree_vertex(s.substr(bar + 1));
  if (x.height() + xp.height() != 0)
    throw ParseError("bad product vertex '" + std::string(text) + "': heights do not cancel");
  return ProductVertex(std::move(x), std::move(xp));
}

std::vector<Move> moves(const ProductEnv& envs, const ProductVertex& v) {
  const ChildIndex down = envs.tree.offspring(v.x());
  const ChildIndex up = envs.tree_prime.offspring(v.x_prime());
  std::vector<Move> out;
  out.reserve(down + up);
  for (ChildIndex i = 0; i < down; ++i) out.push_back({Move::Kind::down, i});
  for (ChildIndex j = 0; j < up; ++j) out.push_back({Move::Kind::up, j});
  return out;
}

void apply_move(const ProductEnv& envs, ProductVertex& v, Move m) {
  if (m.kind == Move::Kind::down) {
    envs.tree.descend(v.x_, m.index);
    envs.tree_prime.ascend(v.x_prime_);
  } else {
    envs.tree_prime.descend(v.x_prime_, m.index);
    envs.tree.ascend(v.x_);
  }
}

ProductVertex moved(const ProductEnv& envs, ProductVertex v, Move m) {
  apply_move(envs, v, m);
  return v;
}

std::vector<ProductVertex> neighbors(const ProductEnv& envs, const ProductVertex& v) {
  std::vector<ProductVertex> out;
  for (Move m : moves(envs, v)) out.push_back(moved(envs, v, m));
  return out;
}

bool adjacent(const ProductEnv& envs, const ProductVertex& a, const ProductVertex& b) {
  (void)envs;
  return tree_distance(a.x(), b.x()) == 1 && tree_distance(a.x_prime(), b.x_prime()) == 1 &&
         a.height() != b.height();
}

std::int64_t height_cocycle(const ProductEnv& envs, const ProductVertex& a, const ProductVertex& b) {
  (void)envs;
  const std::int64_t lower = busemann(a.x(), b.x());
  const std::int64_t upper = -busemann(a.x_prime(), b.x_prime());
  if (lower != upper)
    throw InconsistentHeights("height cocycle mismatch between " + to_string(a) + " and " + to_string(b));
  return lower;
}

std::int64_t product_distance(const ProductVertex& a, const ProductVertex& b) {
  const std::int64_t cocycle = busemann(a.x(), b.x());
  return tree_distance(a.x(), b.x()) + tree_distance(a.x_prime(), b.x_prime()) - std::abs(cocycle);
}

GeodesicCase geodesic_case(const ProductVertex& a, const ProductVertex& b) {
  if (a.height() < b.height()) return GeodesicCase::rising;
  if (a.height() > b.height()) return GeodesicCase::falling;
  return GeodesicCase::level;
}

const char* case_label(GeodesicCase c) {
  switch (c) {
    case GeodesicCase::rising: return "i";
    case GeodesicCase::falling: return "ii";
    case GeodesicCase::level: return "iii";
  }
  return "?";
}

namespace {

// Levels that shape every geodesic between a and b.
struct Frame {
  TreeVertexAddr top;        // x ⋏ y in T
  TreeVertexAddr top_prime;  // x' ⋏ y' in T'
  Height high;               // product level of x ⋏ y
  Height low;                // product level of x' ⋏ y'
};

Frame frame_of(const ProductVertex& a, const ProductVertex& b) {
  Frame f;
  f.top = confluence(a.x(), b.x());
  f.top_prime = confluence(a.x_prime(), b.x_prime());
  f.high = f.top.height();
  f.low = -f.top_prime.height();
  return f;
}

bool admissible(GeodesicCase c, GeodesicOrder o) {
  if (c == GeodesicCase::rising) return o == GeodesicOrder::descend_first;
  if (c == GeodesicCase::falling) return o == GeodesicOrder::ascend_first;
  return true;
}

GeodesicOrder default_order(GeodesicCase c) {
  return c == GeodesicCase::falling ? GeodesicOrder::ascend_first : GeodesicOrder::descend_first;
}

void append_segment(const PointedTreeEnv& env, std::vector<TreeVertexAddr>& out, const TreeVertexAddr& from,
                    const TreeVertexAddr& to) {
  auto seg = tree_geodesic(env, from, to);
  out.insert(out.end(), seg.begin() + (out.empty() ? 0 : 1), seg.end());
}

const TreeVertexAddr& require_descendant(const std::optional<TreeVertexAddr>& given, TreeVertexAddr& fallback,
                                         const PointedTreeEnv& env, const TreeVertexAddr& base, Height level,
                                         const char* what) {
  if (!given) {
    fallback = first_descendant(env, base, base.height() - level);
    return fallback;
  }
  if (given->height() != level)
    throw InvalidChoice(std::string(what) + " " + to_string(*given) + " must be at height " + std::to_string(level));
  if (!is_descendant(*given, base))
    throw InvalidChoice(std::string(what) + " " + to_string(*given) + " is not a descendant of " + to_string(base));
  if (!env.is_canonical(*given))
    throw InvalidChoice(std::string(what) + " " + to_string(*given) + " is not a canonical address");
  return *given;
}

std::vector<ProductVertex> build_path(const ProductEnv& envs, const ProductVertex& a, const ProductVertex& b,
                                      const Frame& f, GeodesicOrder order, const TreeVertexAddr& z,
                                      const TreeVertexAddr& zp) {
  std::vector<TreeVertexAddr> lower;
  std::vector<TreeVertexAddr> upper;
  if (order == GeodesicOrder::descend_first) {
    append_segment(envs.tree, lower, a.x(), z);
    append_segment(envs.tree, lower, z, f.top);
    append_segment(envs.tree, lower, f.top, b.x());
    append_segment(envs.tree_prime, upper, a.x_prime(), f.top_prime);
    append_segment(envs.tree_prime, upper, f.top_prime, zp);
    append_segment(envs.tree_prime, upper, zp, b.x_prime());
  } else {
    append_segment(envs.tree, lower, a.x(), f.top);
    append_segment(envs.tree, lower, f.top, z);
    append_segment(envs.tree, lower, z, b.x());
    append_segment(envs.tree_prime, upper, a.x_prime(), zp);
    append_segment(envs.tree_prime, upper, zp, f.top_prime);
    append_segment(envs.tree_prime, upper, f.top_prime, b.x_prime());
  }
  if (lower.size() != upper.size()) throw std::logic_error("projection lengths disagree");
  std::vector<ProductVertex> path;
  path.reserve(lower.size());
  for (std::size_t i = 0; i < lower.size(); ++i) path.emplace_back(std::move(lower[i]), std::move(upper[i]));
  return path;
}

std::size_t count_descendants(const PointedTreeEnv& env, const TreeVertexAddr& x, Height depth,
                              std::size_t limit) {
  if (env.is_homogeneous()) {
    std::size_t n = 1;
    for (Height d = 0; d < depth; ++d) {
      n *= env.max_offspring();
      if (n > limit) throw BudgetExceeded("descendant count exceeds limit");
    }
    return n;
  }
  return descendants_at_depth(env, x, depth, limit).size();
}

}  // namespace

std::vector<ProductVertex> geodesic_segment(const ProductEnv& envs, const ProductVertex& a, const ProductVertex& b,
                                            const GeodesicChoice& choice) {
  const GeodesicCase c = geodesic_case(a, b);
  const GeodesicOrder order = choice.order.value_or(default_order(c));
  if (!admissible(c, order))
    throw InvalidChoice(std::string("geodesic order not admissible for case (") + case_label(c) + ")");
  const Frame f = frame_of(a, b);
  TreeVertexAddr z_fallback;
  TreeVertexAddr zp_fallback;
  if (order == GeodesicOrder::descend_first) {
    const auto& z = require_descendant(choice.z, z_fallback, envs.tree, a.x(), f.low, "z");
    const auto& zp = require_descendant(choice.z_prime, zp_fallback, envs.tree_prime, b.x_prime(), -f.high, "z'");
    return build_path(envs, a, b, f, order, z, zp);
  }
  const auto& z = require_descendant(choice.z, z_fallback, envs.tree, b.x(), f.low, "z");
  const auto& zp = require_descendant(choice.z_prime, zp_fallback, envs.tree_prime, a.x_prime(), -f.high, "z'");
  return build_path(envs, a, b, f, order, z, zp);
}

GeodesicEnumeration enumerate_geodesics(const ProductEnv& envs, const ProductVertex& a, const ProductVertex& b,
                                        std::size_t max_count) {
  GeodesicEnumeration out;
  out.gcase = geodesic_case(a, b);
  const Frame f = frame_of(a, b);
  std::set<std::vector<ProductVertex>> found;
  const std::size_t cap = std::max<std::size_t>(max_count, 1) * 4 + 16;

  for (GeodesicOrder order : {GeodesicOrder::descend_first, GeodesicOrder::ascend_first}) {
    if (!admissible(out.gcase, order)) continue;
    const bool df = order == GeodesicOrder::descend_first;
    const TreeVertexAddr& z_base = df ? a.x() : b.x();
    const TreeVertexAddr& zp_base = df ? b.x_prime() : a.x_prime();
    std::vector<TreeVertexAddr> zs, zps;
    try {
      zs = descendants_at_depth(envs.tree, z_base, z_base.height() - f.low, cap);
      zps = descendants_at_depth(envs.tree_prime, zp_base, zp_base.height() + f.high, cap);
    } catch (const BudgetExceeded&) {
      out.truncated = true;
      zs.resize(std::min(zs.size(), cap));
      if (zs.empty()) zs.push_back(first_descendant(envs.tree, z_base, z_base.height() - f.low));
      if (zps.empty()) zps = descendants_at_depth(envs.tree_prime, zp_base, 0);
    }
    for (const auto& z : zs) {
      for (const auto& zp : zps) {
        if (found.size() >= max_count) {
          out.truncated = true;
          break;
        }
        found.insert(build_path(envs, a, b, f, order, z, zp));
      }
      if (found.size() >= max_count) break;
    }
  }
  out.paths.assign(found.begin(), found.end());
  return out;
}

std::size_t count_geodesics(const ProductEnv& envs, const ProductVertex& a, const ProductVertex& b,
                            std::size_t limit) {
  const GeodesicCase c = geodesic_case(a, b);
  const Frame f = frame_of(a, b);
  auto family = [&](GeodesicOrder order) {
    const bool df = order == GeodesicOrder::descend_first;
    const TreeVertexAddr& z_base = df ? a.x() : b.x();
    const TreeVertexAddr& zp_base = df ? b.x_prime() : a.x_prime();
    return count_descendants(envs.tree, z_base, z_base.height() - f.low, limit) *
           count_descendants(envs.tree_prime, zp_base, zp_base.height() + f.high, limit);
  };
  if (c == GeodesicCase::rising) return family(GeodesicOrder::descend_first);
  if (c == GeodesicCase::falling) return family(GeodesicOrder::ascend_first);
  // The two height profiles coincide when either confluence sits at the common level.
  if (f.low == a.height() || f.high == a.height()) return family(GeodesicOrder::descend_first);
  return family(GeodesicOrder::descend_first) + family(GeodesicOrder::ascend_first);
}

bool is_path(const ProductEnv& envs, const std::vector<ProductVertex>& path) {
  for (std::size_t i = 0; i + 1 < path.size(); ++i)
    if (!adjacent(envs, path[i], path[i + 1])) return false;
  return true;
}

}  // namespace horo
