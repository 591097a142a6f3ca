#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "betasel/error.hpp"

namespace betasel {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t fmix64(std::uint64_t k) {
  k ^= k >> 33;
  k *= 0xFF51AFD7ED558CCDULL;
  k ^= k >> 33;
  k *= 0xC4CEB9FE1A85EC53ULL;
  k ^= k >> 33;
  return k;
}

inline std::uint64_t rotl64(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

// Hierarchical stream-id layout: replicate block | candidate block | draw index.
// Field widths give 2^24 replicates x 2^20 candidates x 2^20 bootstrap draws,
// all provably disjoint, so determinism never depends on execution schedule.
constexpr std::uint64_t kStreamCandidateShift = 20;
constexpr std::uint64_t kStreamReplicateShift = 40;

inline std::uint64_t stream_id(std::uint64_t replicate, std::uint64_t candidate,
                               std::uint64_t index) {
  return (replicate << kStreamReplicateShift) | (candidate << kStreamCandidateShift) |
         index;
}

/// Splittable counter-seeded PRNG stream (xoshiro256++). The same
/// (master_seed, stream_id) pair always reproduces the identical sequence;
/// distinct stream ids give statistically independent streams.
class rng_stream {
 public:
  rng_stream(std::uint64_t master_seed, std::uint64_t stream) {
    std::uint64_t sm = master_seed ^ detail::fmix64(stream + 0x9E3779B97F4A7C15ULL);
    for (auto& word : state_) word = detail::splitmix64(sm);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = detail::rotl64(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl64(state_[3], 45);
    return result;
  }

  /// Uniform draw strictly inside (0,1).
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller (second value cached).
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    cached_ = radius * std::sin(angle);
    have_cached_ = true;
    return radius * std::cos(angle);
  }

  /// log of a Gamma(shape, 1) draw. Computed in log space so shapes far below
  /// one cannot underflow to zero.
  double log_gamma_variate(double shape) {
    if (!(shape > 0.0))
      fail(errc::validation,
           "gamma variate: shape must be positive, got " + std::to_string(shape));
    if (shape < 1.0) {
      // boost shape: G(a) = G(a+1) * U^(1/a)
      const double boost_log = std::log(uniform()) / shape;
      return log_gamma_variate(shape + 1.0) + boost_log;
    }
    // Marsaglia-Tsang squeeze
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / (3.0 * std::sqrt(d));
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return std::log(d * v);
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return std::log(d * v);
    }
  }

  double gamma_variate(double shape) { return std::exp(log_gamma_variate(shape)); }

  /// Beta(p, q) draw as G1/(G1+G2), formed in log space and clamped away from
  /// the boundary so log(y) and log(1-y) stay finite downstream.
  double beta(double p, double q) {
    if (!(p > 0.0) || !(q > 0.0))
      fail(errc::validation, "beta variate: shapes must be positive");
    const double lg1 = log_gamma_variate(p);
    const double lg2 = log_gamma_variate(q);
    // G1/(G1+G2) = 1/(1+exp(lg2-lg1))
    const double draw = 1.0 / (1.0 + std::exp(lg2 - lg1));
    constexpr double eps = 1e-12;
    return std::min(1.0 - eps, std::max(eps, draw));
  }

 private:
  std::uint64_t state_[4];
  double cached_ = 0.0;
  bool have_cached_ = false;
};

inline double sample_beta(rng_stream& stream, double p, double q) {
  return stream.beta(p, q);
}

}  // namespace betasel
