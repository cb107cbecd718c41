#include "horo/tree.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <numeric>
#include <stdexcept>

#include "horo/errors.hpp"

namespace horo {

namespace {

constexpr std::uint64_t kSpineSalt = 0x5851F42D4C957F2DULL;
constexpr std::uint64_t kPrefixSalt = 0xD1B54A32D192ED03ULL;

std::uint64_t extend_key(std::uint64_t prefix, ChildIndex i) noexcept {
  return hash_combine(prefix ^ kPrefixSalt, static_cast<std::uint64_t>(i) + 1);
}

}  // namespace

TreeVertexAddr::TreeVertexAddr(std::int64_t spine_depth, std::vector<ChildIndex> descent) : k_(spine_depth) {
  if (spine_depth < 0) throw std::invalid_argument("spine depth must be nonnegative");
  descent_.reserve(descent.size());
  keys_.reserve(descent.size());
  for (ChildIndex i : descent) push_child(i);
}

void TreeVertexAddr::push_child(ChildIndex i) {
  const std::uint64_t prev = descent_.empty() ? base_key(k_) : keys_.back();
  descent_.push_back(i);
  keys_.push_back(extend_key(prev, i));
}

void TreeVertexAddr::pop_child() noexcept {
  descent_.pop_back();
  keys_.pop_back();
}

void TreeVertexAddr::reset_to_spine(std::int64_t k) noexcept {
  k_ = k;
  descent_.clear();
  keys_.clear();
}

TreeVertexAddr TreeVertexAddr::truncated(std::size_t len) const {
  TreeVertexAddr out;
  out.k_ = k_;
  len = std::min(len, descent_.size());
  out.descent_.assign(descent_.begin(), descent_.begin() + static_cast<std::ptrdiff_t>(len));
  out.keys_.assign(keys_.begin(), keys_.begin() + static_cast<std::ptrdiff_t>(len));
  return out;
}

std::strong_ordering operator<=>(const TreeVertexAddr& a, const TreeVertexAddr& b) noexcept {
  if (auto c = a.k_ <=> b.k_; c != 0) return c;
  return std::lexicographical_compare_three_way(a.descent_.begin(), a.descent_.end(), b.descent_.begin(),
                                                b.descent_.end());
}

std::string to_string(const TreeVertexAddr& x) {
  std::string out = std::to_string(x.spine_depth());
  out += ":[";
  bool first = true;
  for (ChildIndex i : x.descent()) {
    if (!first) out += ',';
    out += std::to_string(i);
    first = false;
  }
  out += ']';
  return out;
}

TreeVertexAddr parse_tree_vertex(std::string_view text) {
  auto fail = [&](const char* why) {
    return ParseError("bad tree vertex '" + std::string(text) + "': " + why);
  };
  std::size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  };
  auto read_int = [&](auto& value) {
    skip_ws();
    const char* begin = text.data() + pos;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr == begin) throw fail("expected integer");
    pos += static_cast<std::size_t>(ptr - begin);
  };
  auto expect = [&](char c) {
    skip_ws();
    if (pos >= text.size() || text[pos] != c) throw fail("unexpected character");
    ++pos;
  };

  std::int64_t k = 0;
  read_int(k);
  if (k < 0) throw fail("negative spine depth");
  expect(':');
  expect('[');
  std::vector<ChildIndex> descent;
  skip_ws();
  if (pos < text.size() && text[pos] == ']') {
    ++pos;
  } else {
    for (;;) {
      ChildIndex i = 0;
      read_int(i);
      descent.push_back(i);
      skip_ws();
      if (pos < text.size() && text[pos] == ',') {
        ++pos;
        continue;
      }
      expect(']');
      break;
    }
  }
  skip_ws();
  if (pos != text.size()) throw fail("trailing characters");
  return TreeVertexAddr(k, std::move(descent));
}

// ---------------------------------------------------------------------------

PointedTreeEnv PointedTreeEnv::homogeneous(ChildIndex children, std::string label) {
  if (children < 1) throw std::invalid_argument("homogeneous tree needs at least one child per vertex");
  PointedTreeEnv env;
  env.kind_ = EnvKind::homogeneous;
  env.children_ = children;
  env.label_ = label.empty() ? "T" + std::to_string(children + 1) : std::move(label);
  return env;
}

PointedTreeEnv PointedTreeEnv::galton_watson(std::vector<double> offspring_probs, std::uint64_t seed,
                                             std::string label) {
  if (offspring_probs.empty()) throw std::invalid_argument("offspring law must be nonempty");
  double total = 0.0;
  for (double p : offspring_probs) {
    if (!(p >= 0.0)) throw std::invalid_argument("offspring probabilities must be nonnegative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("offspring probabilities must sum to 1");
  PointedTreeEnv env;
  env.kind_ = EnvKind::galton_watson;
  env.probs_ = std::move(offspring_probs);
  env.law_ = CumulativeThresholds(env.probs_);
  env.seed_ = seed;
  env.seed_key_ = mix64(seed ^ 0x6A09E667F3BCC909ULL);
  env.label_ = label.empty() ? "GW" : std::move(label);
  return env;
}

ChildIndex PointedTreeEnv::max_offspring() const noexcept {
  return kind_ == EnvKind::homogeneous ? children_ : static_cast<ChildIndex>(probs_.size());
}

double PointedTreeEnv::mean_offspring() const noexcept {
  if (kind_ == EnvKind::homogeneous) return children_;
  double m = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) m += static_cast<double>(i + 1) * probs_[i];
  return m;
}

ChildIndex PointedTreeEnv::draw_offspring(std::uint64_t r) const noexcept {
  return static_cast<ChildIndex>(law_.sample(r) + 1);
}

ChildIndex PointedTreeEnv::offspring(const TreeVertexAddr& x) const noexcept {
  if (kind_ == EnvKind::homogeneous) return children_;
  return draw_offspring(hash_combine(seed_key_, x.key()));
}

ChildIndex PointedTreeEnv::spine_child_index(std::int64_t k) const noexcept {
  if (kind_ == EnvKind::homogeneous) return 0;
  const ChildIndex count = draw_offspring(hash_combine(seed_key_, TreeVertexAddr::base_key(k)));
  return uniform_index(hash_combine(seed_key_ ^ kSpineSalt, TreeVertexAddr::base_key(k)), count);
}

ChildIndex PointedTreeEnv::index_in_parent(const TreeVertexAddr& x) const noexcept {
  if (!x.on_spine()) return x.descent().back();
  return spine_child_index(x.spine_depth() + 1);
}

void PointedTreeEnv::ascend(TreeVertexAddr& x) const {
  if (x.on_spine())
    x.reset_to_spine(x.spine_depth() + 1);
  else
    x.pop_child();
}

void PointedTreeEnv::descend(TreeVertexAddr& x, ChildIndex i) const {
  if (i >= offspring(x)) throw std::out_of_range("child index " + std::to_string(i) + " out of range at " + to_string(x));
  if (x.on_spine() && x.spine_depth() > 0 && i == spine_child_index(x.spine_depth()))
    x.reset_to_spine(x.spine_depth() - 1);
  else
    x.push_child(i);
}

TreeVertexAddr PointedTreeEnv::parent(const TreeVertexAddr& x) const {
  TreeVertexAddr p = x;
  ascend(p);
  return p;
}

TreeVertexAddr PointedTreeEnv::child(const TreeVertexAddr& x, ChildIndex i) const {
  TreeVertexAddr c = x;
  descend(c, i);
  return c;
}

std::vector<TreeVertexAddr> PointedTreeEnv::children(const TreeVertexAddr& x) const {
  const ChildIndex n = offspring(x);
  std::vector<TreeVertexAddr> out;
  out.reserve(n);
  for (ChildIndex i = 0; i < n; ++i) out.push_back(child(x, i));
  return out;
}

bool PointedTreeEnv::is_canonical(const TreeVertexAddr& x) const noexcept {
  if (x.spine_depth() < 0) return false;
  TreeVertexAddr cur = TreeVertexAddr::spine(x.spine_depth());
  bool first = true;
  for (ChildIndex i : x.descent()) {
    if (i >= offspring(cur)) return false;
    if (first && x.spine_depth() > 0 && i == spine_child_index(x.spine_depth())) return false;
    first = false;
    cur.push_child(i);
  }
  return true;
}

void PointedTreeEnv::validate(const TreeVertexAddr& x) const {
  if (!is_canonical(x)) throw std::invalid_argument("address " + to_string(x) + " is not canonical in " + label_);
}

// ---------------------------------------------------------------------------

TreeVertexAddr confluence(const TreeVertexAddr& x, const TreeVertexAddr& y) {
  if (x.spine_depth() != y.spine_depth())
    return TreeVertexAddr::spine(std::max(x.spine_depth(), y.spine_depth()));
  auto dx = x.descent();
  auto dy = y.descent();
  auto [ix, iy] = std::mismatch(dx.begin(), dx.end(), dy.begin(), dy.end());
  return x.truncated(static_cast<std::size_t>(ix - dx.begin()));
}

std::int64_t busemann(const TreeVertexAddr& x, const TreeVertexAddr& y) {
  const TreeVertexAddr z = confluence(x, y);
  return (z.height() - y.height()) - (z.height() - x.height());
}

std::int64_t tree_distance(const TreeVertexAddr& x, const TreeVertexAddr& y) {
  const Height top = confluence(x, y).height();
  return (top - x.height()) + (top - y.height());
}

std::vector<TreeVertexAddr> tree_geodesic(const PointedTreeEnv& env, const TreeVertexAddr& x,
                                          const TreeVertexAddr& y) {
  const TreeVertexAddr z = confluence(x, y);
  std::vector<TreeVertexAddr> up;
  for (TreeVertexAddr v = x;; env.ascend(v)) {
    up.push_back(v);
    if (v == z) break;
  }
  std::vector<TreeVertexAddr> down;
  for (TreeVertexAddr v = y; v != z; env.ascend(v)) down.push_back(v);
  up.insert(up.end(), down.rbegin(), down.rend());
  return up;
}

bool is_descendant(const TreeVertexAddr& v, const TreeVertexAddr& anc) {
  if (anc.height() < v.height()) return false;
  return confluence(v, anc) == anc;
}

TreeVertexAddr ancestor(const PointedTreeEnv& env, TreeVertexAddr x, std::int64_t steps) {
  if (steps < 0) throw std::invalid_argument("negative ancestor distance");
  const auto depth = static_cast<std::int64_t>(x.depth());
  if (steps <= depth) return x.truncated(static_cast<std::size_t>(depth - steps));
  (void)env;
  return TreeVertexAddr::spine(x.spine_depth() + (steps - depth));
}

std::vector<TreeVertexAddr> descendants_at_depth(const PointedTreeEnv& env, const TreeVertexAddr& x,
                                                 std::int64_t depth, std::size_t limit) {
  if (depth < 0) throw std::invalid_argument("negative descendant depth");
  std::vector<TreeVertexAddr> level{x};
  for (std::int64_t d = 0; d < depth; ++d) {
    std::vector<TreeVertexAddr> next;
    for (const auto& v : level) {
      const ChildIndex n = env.offspring(v);
      for (ChildIndex i = 0; i < n; ++i) {
        next.push_back(env.child(v, i));
        if (next.size() > limit) throw BudgetExceeded("more than " + std::to_string(limit) + " descendants");
      }
    }
    level = std::move(next);
  }
  return level;
}

TreeVertexAddr first_descendant(const PointedTreeEnv& env, TreeVertexAddr x, std::int64_t depth) {
  for (std::int64_t d = 0; d < depth; ++d) env.descend(x, 0);
  return x;
}

// ---------------------------------------------------------------------------

End::End(TreeVertexAddr anchor, std::vector<ChildIndex> prefix, TailRule rule, std::uint64_t tail_seed)
    : anchor_(std::move(anchor)), prefix_(std::move(prefix)), rule_(rule), tail_seed_(tail_seed) {}

ChildIndex End::index_at(const PointedTreeEnv& env, std::size_t step, const TreeVertexAddr& at) const {
  const ChildIndex n = env.offspring(at);
  if (step < prefix_.size()) {
    if (prefix_[step] >= n)
      throw std::out_of_range("end prefix index " + std::to_string(prefix_[step]) + " invalid at " + to_string(at));
    return prefix_[step];
  }
  if (rule_ == TailRule::first_child) return 0;
  return uniform_index(hash_combine(tail_seed_, at.key()), n);
}

EndCursor::EndCursor(const PointedTreeEnv& env, End end)
    : env_(&env), end_(std::move(end)), current_(end_.anchor()) {}

void EndCursor::advance() {
  env_->descend(current_, end_.index_at(*env_, step_, current_));
  ++step_;
}

void EndCursor::advance_to(std::size_t target) {
  while (step_ < target) advance();
}

TreeVertexAddr end_vertex_at_height(const PointedTreeEnv& env, const End& end, Height h) {
  const Height top = end.anchor().height();
  if (h >= top) return ancestor(env, end.anchor(), h - top);
  EndCursor cursor(env, end);
  cursor.advance_to(static_cast<std::size_t>(top - h));
  return cursor.current();
}

TreeVertexAddr confluence_with_end(const PointedTreeEnv& env, const TreeVertexAddr& x, const End& end) {
  // Once the end's ray is at or below x's level, its confluence with x is the
  // first vertex of [x, gamma) on the bilateral geodesic (end, gamma).
  const Height gap = end.anchor().height() - x.height();
  EndCursor cursor(env, end);
  cursor.advance_to(static_cast<std::size_t>(std::max<Height>(0, gap)));
  return confluence(x, cursor.current());
}

// ---------------------------------------------------------------------------

TreeRay::TreeRay(const PointedTreeEnv& env, std::vector<TreeVertexAddr> prefix, std::optional<EndCursor> tail)
    : env_(&env), prefix_(std::move(prefix)), tail_(std::move(tail)), current_(prefix_.front()) {}

TreeRay TreeRay::toward_gamma(const PointedTreeEnv& env, TreeVertexAddr from) {
  return TreeRay(env, {std::move(from)}, std::nullopt);
}

TreeRay TreeRay::path_then_gamma(const PointedTreeEnv& env, std::vector<TreeVertexAddr> path) {
  if (path.empty()) throw std::invalid_argument("empty path");
  return TreeRay(env, std::move(path), std::nullopt);
}

TreeRay TreeRay::toward_end(const PointedTreeEnv& env, const TreeVertexAddr& from, const End& end) {
  const TreeVertexAddr c = confluence_with_end(env, from, end);
  std::vector<TreeVertexAddr> prefix = tree_geodesic(env, from, c);
  EndCursor cursor(env, end);
  if (c.height() >= end.anchor().height()) {
    auto down = tree_geodesic(env, c, end.anchor());
    prefix.insert(prefix.end(), down.begin() + 1, down.end());
  } else {
    cursor.advance_to(static_cast<std::size_t>(end.anchor().height() - c.height()));
  }
  return TreeRay(env, std::move(prefix), std::move(cursor));
}

void TreeRay::advance() {
  ++position_;
  if (position_ < prefix_.size()) {
    current_ = prefix_[position_];
  } else if (tail_) {
    tail_->advance();
    current_ = tail_->current();
  } else {
    env_->ascend(current_);
  }
}

std::vector<TreeVertexAddr> end_ray(const PointedTreeEnv& env, const End& end, const TreeVertexAddr& from,
                                    std::size_t n) {
  TreeRay ray = TreeRay::toward_end(env, from, end);
  std::vector<TreeVertexAddr> out;
  out.reserve(n + 1);
  out.push_back(ray.current());
  for (std::size_t i = 0; i < n; ++i) {
    ray.advance();
    out.push_back(ray.current());
  }
  return out;
}

}  // namespace horo
