#include "horo/boundary.hpp"

#include <algorithm>
#include <stdexcept>

#include "horo/errors.hpp"

namespace horo {

const char* side_label(BoundarySide s) { return s == BoundarySide::upper ? "upper" : "lower"; }

std::string to_string(const BoundaryPoint& p) {
  std::string out = side_label(p.side);
  out += "(" + to_string(p.end.anchor()) + " then [";
  for (std::size_t i = 0; i < p.end.prefix().size(); ++i) {
    if (i) out += ",";
    out += std::to_string(p.end.prefix()[i]);
  }
  out += "])";
  return out;
}

RayTarget default_ray_target(const ProductEnv& envs, const ProductVertex& start, BoundaryPoint limit) {
  if (limit.side == BoundarySide::upper) {
    const TreeVertexAddr c = confluence_with_end(envs.tree_prime, start.x_prime(), limit.end);
    TreeVertexAddr z = first_descendant(envs.tree, start.x(), start.x().height() + c.height());
    return RayTarget::upper(std::move(z), std::move(limit.end));
  }
  const TreeVertexAddr c = confluence_with_end(envs.tree, start.x(), limit.end);
  TreeVertexAddr zp = first_descendant(envs.tree_prime, start.x_prime(), start.x_prime().height() + c.height());
  return RayTarget::lower(std::move(limit.end), std::move(zp));
}

namespace {

void check_turn(const PointedTreeEnv& env, const TreeVertexAddr& from, const TreeVertexAddr& turn, Height level,
                const char* what) {
  if (!env.is_canonical(turn)) throw InvalidTarget(std::string(what) + " " + to_string(turn) + " is not canonical");
  if (!is_descendant(turn, from))
    throw InvalidTarget(std::string(what) + " " + to_string(turn) + " is not a descendant of " + to_string(from));
  if (turn.height() != level)
    throw InvalidTarget(std::string(what) + " " + to_string(turn) + " must have height " + std::to_string(level));
}

void check_end(const PointedTreeEnv& env, const End& end) {
  if (!env.is_canonical(end.anchor()))
    throw InvalidTarget("end anchor " + to_string(end.anchor()) + " is not canonical");
  TreeVertexAddr at = end.anchor();
  for (std::size_t i = 0; i < end.prefix().size(); ++i) {
    if (end.prefix()[i] >= env.offspring(at))
      throw InvalidTarget("end prefix index " + std::to_string(end.prefix()[i]) + " invalid at " + to_string(at));
    env.descend(at, end.prefix()[i]);
  }
}

TreeRay lower_ray(const ProductEnv& envs, const ProductVertex& start, const RayTarget& t) {
  if (t.side == BoundarySide::upper) {
    check_end(envs.tree_prime, t.end);
    const TreeVertexAddr c = confluence_with_end(envs.tree_prime, start.x_prime(), t.end);
    check_turn(envs.tree, start.x(), t.vertex, -c.height(), "z");
    return TreeRay::path_then_gamma(envs.tree, tree_geodesic(envs.tree, start.x(), t.vertex));
  }
  check_end(envs.tree, t.end);
  return TreeRay::toward_end(envs.tree, start.x(), t.end);
}

TreeRay upper_ray(const ProductEnv& envs, const ProductVertex& start, const RayTarget& t) {
  if (t.side == BoundarySide::upper) return TreeRay::toward_end(envs.tree_prime, start.x_prime(), t.end);
  const TreeVertexAddr c = confluence_with_end(envs.tree, start.x(), t.end);
  check_turn(envs.tree_prime, start.x_prime(), t.vertex, -c.height(), "z'");
  return TreeRay::path_then_gamma(envs.tree_prime, tree_geodesic(envs.tree_prime, start.x_prime(), t.vertex));
}

}  // namespace

GeodesicRay::GeodesicRay(const ProductEnv& envs, const ProductVertex& start, const RayTarget& target)
    : lower_(lower_ray(envs, start, target)), upper_(upper_ray(envs, start, target)), current_(start) {}

void GeodesicRay::advance() {
  lower_.advance();
  upper_.advance();
  current_ = ProductVertex(lower_.current(), upper_.current());
}

std::vector<ProductVertex> GeodesicRay::take(std::size_t n) {
  std::vector<ProductVertex> out;
  out.reserve(n + 1);
  out.push_back(current_);
  for (std::size_t i = 0; i < n; ++i) {
    advance();
    out.push_back(current_);
  }
  return out;
}

BilateralGeodesic::BilateralGeodesic(const ProductEnv& envs, BoundaryPoint from, BoundaryPoint to, Height anchor)
    : envs_(&envs), anchor_(anchor) {
  if (from.side == to.side) throw std::invalid_argument("bilateral geodesic needs one upper and one lower point");
  direction_ = from.side == BoundarySide::lower ? 1 : -1;
  BoundaryPoint& low = from.side == BoundarySide::lower ? from : to;
  BoundaryPoint& up = from.side == BoundarySide::lower ? to : from;
  check_end(envs.tree, low.end);
  check_end(envs.tree_prime, up.end);
  omega_ = std::move(low.end);
  omega_prime_ = std::move(up.end);
}

ProductVertex BilateralGeodesic::at(std::int64_t i) const {
  const Height h = anchor_ + direction_ * i;
  return ProductVertex(end_vertex_at_height(envs_->tree, omega_, h),
                       end_vertex_at_height(envs_->tree_prime, omega_prime_, -h));
}

std::vector<ProductVertex> BilateralGeodesic::window(std::int64_t first, std::size_t m) const {
  std::vector<ProductVertex> out;
  out.reserve(m + 1);
  for (std::size_t j = 0; j <= m; ++j) out.push_back(at(first + static_cast<std::int64_t>(j)));
  return out;
}

const char* limit_label(LimitKind k) {
  switch (k) {
    case LimitKind::none: return "none";
    case LimitKind::upper: return "upper";
    case LimitKind::lower: return "lower";
  }
  return "?";
}

void LimitDetector::Track::start(const TreeVertexAddr& a) {
  anchor_stable = true;
  anchor_at_half = anchor_now = a.spine_depth();
  reference.assign(a.descent().begin(), a.descent().end());
  common = reference.size();
}

void LimitDetector::Track::update(const TreeVertexAddr& a) {
  anchor_now = a.spine_depth();
  if (anchor_now != anchor_at_half) anchor_stable = false;
  if (!anchor_stable) {
    common = 0;
    return;
  }
  const auto d = a.descent();
  const std::size_t len = std::min(common, d.size());
  common = static_cast<std::size_t>(std::mismatch(d.begin(), d.begin() + len, reference.begin()).first - d.begin());
}

LimitDetector::LimitDetector(std::size_t window, std::size_t depth, double min_rate)
    : window_(window), depth_(depth), min_rate_(min_rate), half_start_(window / 2) {}

void LimitDetector::observe(const ProductVertex& v) {
  if (full()) return;
  if (observed_ == half_start_) {
    height_at_half_ = v.height();
    lower_.start(v.x());
    upper_.start(v.x_prime());
  } else if (observed_ > half_start_) {
    lower_.update(v.x());
    upper_.update(v.x_prime());
  }
  height_now_ = v.height();
  ++observed_;
}

LimitVerdict LimitDetector::verdict() const {
  LimitVerdict out;
  out.observed = observed_;
  if (observed_ <= half_start_) return out;
  const double span = static_cast<double>(observed_ - 1 - half_start_);
  const double gain = static_cast<double>(height_now_ - height_at_half_);
  const bool rising = gain > 0 && gain >= min_rate_ * span;
  const bool falling = gain < 0 && -gain >= min_rate_ * span;
  auto end_of = [](const Track& t) {
    return End(TreeVertexAddr::spine(t.anchor_at_half),
               std::vector<ChildIndex>(t.reference.begin(), t.reference.begin() + t.common));
  };
  if (rising && upper_.anchor_stable && lower_.anchor_now > lower_.anchor_at_half) {
    out.stabilized = upper_.common;
    if (upper_.common >= depth_) {
      out.kind = LimitKind::upper;
      out.limit = BoundaryPoint::upper(end_of(upper_));
    }
  } else if (falling && lower_.anchor_stable && upper_.anchor_now > upper_.anchor_at_half) {
    out.stabilized = lower_.common;
    if (lower_.common >= depth_) {
      out.kind = LimitKind::lower;
      out.limit = BoundaryPoint::lower(end_of(lower_));
    }
  }
  return out;
}

LimitVerdict classify_limit(std::span<const ProductVertex> sequence, std::size_t depth, double min_rate) {
  LimitDetector detector(sequence.size(), depth, min_rate);
  for (const auto& v : sequence) detector.observe(v);
  return detector.verdict();
}

}  // namespace horo
