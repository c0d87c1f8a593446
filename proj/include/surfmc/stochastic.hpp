#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "surfmc/errors.hpp"
#include "surfmc/point.hpp"

// Reproducible sample streams and the random diffusion coefficient.
//
// Every Monte-Carlo sample gets its own counter-based stream derived from
// (master seed, replicate, sample index) by chained SplitMix64 finalizers:
//
//   base     = mix(mix(master + KR*(replicate+1)) + KI*(sample+1))
//   output_c = mix(base + KC*(c+1))                      c = 0, 1, 2, ...
//   uniform  = ((output_c >> 11) + 0.5) * 2^-53          in (0,1), exclusive
//
// with mix the SplitMix64 finalizer and KR, KI, KC fixed odd constants (below).
// Streams are pure functions of their indices: the draw for sample i never
// depends on worker count or evaluation order, and growing M extends the
// sample set instead of reshuffling it.

namespace surfmc {

using Sample = std::vector<double>;

struct SeedSpec {
  std::uint64_t master = 0;
};

namespace detail {

inline constexpr std::uint64_t kReplicateSalt = 0x9E3779B97F4A7C15ull;
inline constexpr std::uint64_t kSampleSalt = 0xD1B54A32D192ED03ull;
inline constexpr std::uint64_t kCounterSalt = 0x8CB92BA72F3D8DD7ull;

// SplitMix64 finalizer (Steele, Lea, Flood '14).
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

}  // namespace detail

class SampleStream {
 public:
  SampleStream(SeedSpec seed, std::uint64_t replicate, std::uint64_t sample_index)
      : base_(detail::mix64(detail::mix64(seed.master + detail::kReplicateSalt * (replicate + 1)) +
                            detail::kSampleSalt * (sample_index + 1))) {}

  // Uniform in (0,1), both endpoints excluded.
  double next_uniform01() {
    const std::uint64_t bits = detail::mix64(base_ + detail::kCounterSalt * (++counter_));
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform in (-1,1), both endpoints excluded.
  double next_symmetric() { return 2.0 * next_uniform01() - 1.0; }

 private:
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
};

// The d-dimensional Uniform(-1,1)^d draw for one (replicate, sample) pair.
inline Sample draw_sample(SeedSpec seed, std::uint64_t replicate, std::uint64_t sample_index, int dim) {
  SampleStream stream(seed, replicate, sample_index);
  Sample y(dim);
  for (auto& v : y) v = stream.next_symmetric();
  return y;
}

inline std::vector<Sample> draw_samples(SeedSpec seed, std::uint64_t replicate, long count, int dim) {
  std::vector<Sample> ys;
  ys.reserve(count);
  for (long i = 0; i < count; ++i) ys.push_back(draw_sample(seed, replicate, i, dim));
  return ys;
}

// Scalar random diffusion coefficient alpha(x, t; Y) with declared bounds over
// the admissible (x, Y) set.  `affine_in_sample` marks coefficients of the form
// alpha0(x,t) + sum_k Y_k alpha_k(x,t), which unlocks the precomputed-basis
// Monte-Carlo path.
template <int N>
struct RandomCoefficient {
  std::string name;
  std::function<double(const Vec<N>&, double, const Sample&)> evaluate;
  double alpha_min = 0.0;
  double alpha_max = 0.0;
  bool affine_in_sample = false;
  int sample_dim = 2;
};

template <int N>
double alpha_eval(const RandomCoefficient<N>& coefficient, const Vec<N>& x, double t, const Sample& y) {
  if (static_cast<int>(y.size()) != coefficient.sample_dim)
    throw Error("sample dimension does not match the coefficient");
  return coefficient.evaluate(x, t, y);
}

}  // namespace surfmc
