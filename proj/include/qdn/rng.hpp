#ifndef QDN_RNG_HPP
#define QDN_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>

namespace qdn {

/// Counter-based 64-bit generator (SplitMix64): every output is a hash of an
/// incrementing counter, and (seed, stream_id) pairs hash to independent
/// streams. Distributions are hand-rolled so sequences are bit-identical
/// across standard libraries and platforms.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : state_(seed) {}

  /// Independent stream for a (seed, stream_id) pair.
  static Rng stream(std::uint64_t seed, std::uint64_t stream_id) {
    return Rng(mix(seed + 0x9E3779B97F4A7C15ULL * (stream_id + 1)));
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
  }

  /// Standard normal via Box-Muller; the second variate is cached.
  double normal() {
    if (has_cache_) {
      has_cache_ = false;
      return cache_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * uniform();
    cache_ = r * std::sin(phi);
    has_cache_ = true;
    return r * std::cos(phi);
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Binomial draw. Small-p/large-n cases use geometric skips between
  /// successes so sparse baths (n ~ 1e5, p ~ 1e-5) stay O(n p).
  long binomial(long n, double p) {
    if (n <= 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    if (n > 64 && p < 0.05) {
      const double log_q = std::log1p(-p);
      long k = 0;
      long i = 0;
      while (true) {
        double u = uniform();
        while (u <= 0.0) u = uniform();
        i += static_cast<long>(std::floor(std::log(u) / log_q)) + 1;
        if (i > n) break;
        ++k;
      }
      return k;
    }
    long k = 0;
    for (long i = 0; i < n; ++i) k += bernoulli(p) ? 1 : 0;
    return k;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t state_;
  double cache_ = 0.0;
  bool has_cache_ = false;
};

}  // namespace qdn

#endif
