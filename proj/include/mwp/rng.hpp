#pragma once

// Deterministic random streams. Bounded integers and the Poisson sampler are
// implemented here rather than with std distributions, whose output is
// implementation-defined; mt19937_64 raw output is specified by the standard.

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace mwp {

inline uint64_t mix_seed(uint64_t base, std::string_view tag) {
  uint64_t h = 1469598103934665603ull ^ base;
  for (char c : tag) {
    h ^= uint64_t(uint8_t(c));
    h *= 1099511628211ull;
  }
  // splitmix64 finalizer
  h += 0x9e3779b97f4a7c15ull;
  h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ull;
  h = (h ^ (h >> 27)) * 0x94d049bb133111ebull;
  return h ^ (h >> 31);
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Inclusive [lo, hi], unbiased via rejection.
  uint64_t uniform_u64(uint64_t lo, uint64_t hi) {
    uint64_t range = hi - lo + 1;
    if (range == 0) return next_u64();  // full range
    uint64_t limit = UINT64_MAX - UINT64_MAX % range;
    uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return lo + v % range;
  }

  double uniform_double() {  // [0, 1)
    return double(next_u64() >> 11) * 0x1.0p-53;
  }

  long long poisson(double lambda) {
    if (lambda <= 0) return 0;
    if (lambda < 30.0) return poisson_inversion(lambda);
    return poisson_ptrs(lambda);
  }

 private:
  long long poisson_inversion(double lambda) {
    double limit = std::exp(-lambda);
    long long k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform_double();
    } while (p > limit);
    return k - 1;
  }

  // Hormann's transformed rejection with squeeze (PTRS), valid for lambda >= 10.
  long long poisson_ptrs(double lambda) {
    const double log_lambda = std::log(lambda);
    const double b = 0.931 + 2.53 * std::sqrt(lambda);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    while (true) {
      double u = uniform_double() - 0.5;
      double v = uniform_double();
      double us = 0.5 - std::fabs(u);
      double kf = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
      if (us >= 0.07 && v <= v_r) return (long long)kf;
      if (kf < 0.0 || (us < 0.013 && v > us)) continue;
      if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
          kf * log_lambda - lambda - std::lgamma(kf + 1.0))
        return (long long)kf;
    }
  }

  std::mt19937_64 engine_;
};

inline bool is_prime_u64(uint64_t n) {
  if (n < 2) return false;
  for (uint64_t d : {2ull, 3ull, 5ull, 7ull}) {
    if (n == d) return true;
    if (n % d == 0) return false;
  }
  for (uint64_t d = 11; d * d <= n; d += 2)
    if (n % d == 0) return false;
  return true;
}

// Smallest prime strictly greater than n.
inline uint64_t next_prime_after(uint64_t n) {
  uint64_t c = n + 1;
  if (c <= 2) return 2;
  if (c % 2 == 0) ++c;
  while (!is_prime_u64(c)) c += 2;
  return c;
}

}  // namespace mwp
