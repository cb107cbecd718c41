#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace horo {

// splitmix64 finalizer; the stateless mixing step used for keyed hashing.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) noexcept {
  return mix64(seed ^ (value * 0x9E3779B97F4A7C15ULL + 0x632BE59BD9B4E019ULL));
}

/// Fixed-increment splitmix64 stream. Fully specified integer arithmetic, so
/// streams are identical across platforms and compilers.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed = 0) noexcept : state_(seed) {}

  std::uint64_t operator()() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
  }

  /// Independent child stream keyed by `stream_id`.
  SplitMix64 split(std::uint64_t stream_id) const noexcept {
    return SplitMix64(hash_combine(state_, stream_id));
  }

  static constexpr std::uint64_t min() { return 0; }
  static constexpr std::uint64_t max() { return std::numeric_limits<std::uint64_t>::max(); }

 private:
  std::uint64_t state_;
};

/// Uniform integer in [0, n) by 64x64->128 multiply (Lemire's reduction
/// without rejection; bias is below 2^-58 for the small n used here).
inline std::uint32_t uniform_index(std::uint64_t r, std::uint32_t n) noexcept {
  return static_cast<std::uint32_t>((static_cast<unsigned __int128>(r) * n) >> 64);
}

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(std::uint64_t r) noexcept { return static_cast<double>(r >> 11) * 0x1.0p-53; }

/// Probability -> 64-bit threshold. A draw r "hits" the event iff r < threshold;
/// probability 1 maps to the saturated value and is handled by callers via
/// `CumulativeThresholds`.
inline std::uint64_t probability_threshold(double p) noexcept {
  if (!(p > 0.0)) return 0;
  if (p >= 1.0) return std::numeric_limits<std::uint64_t>::max();
  const double scaled = std::ldexp(p, 64);
  if (scaled >= 18446744073709551615.0) return std::numeric_limits<std::uint64_t>::max();
  return static_cast<std::uint64_t>(scaled);
}

/// Categorical sampler over a probability vector, realized with integer
/// comparisons only: bucket i is chosen iff t_{i-1} <= r < t_i, where t_i is
/// the threshold of the i-th cumulative sum. The last positive bucket absorbs
/// the residual so every draw lands somewhere.
class CumulativeThresholds {
 public:
  CumulativeThresholds() = default;

  explicit CumulativeThresholds(std::span<const double> probs) {
    thresholds_.reserve(probs.size());
    double total = 0.0;
    for (double p : probs) {
      if (p < 0.0 || !std::isfinite(p)) throw std::invalid_argument("probabilities must be finite and nonnegative");
      total += p;
    }
    if (!(total > 0.0)) throw std::invalid_argument("probabilities sum to zero");
    double cum = 0.0;
    last_positive_ = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      cum += probs[i];
      thresholds_.push_back(probability_threshold(cum / total));
      if (probs[i] > 0.0) last_positive_ = i;
    }
  }

  std::size_t sample(std::uint64_t r) const noexcept {
    for (std::size_t i = 0; i < last_positive_; ++i)
      if (r < thresholds_[i]) return i;
    return last_positive_;
  }

  std::size_t size() const noexcept { return thresholds_.size(); }

 private:
  std::vector<std::uint64_t> thresholds_;
  std::size_t last_positive_ = 0;
};

}  // namespace horo
