#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "accessopt/errors.hpp"

namespace accessopt {

// Deterministic random source. The engine (mt19937_64) is fully specified by
// the standard, and all value transforms are implemented here rather than via
// std distributions, whose algorithms differ between standard libraries.
// Same seed therefore means the same stream on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Rejection sampling keeps it unbiased.
  std::uint64_t uniform_index(std::uint64_t n) {
    if (n == 0) throw ValidationError("uniform_index: n must be positive");
    const std::uint64_t limit = (UINT64_MAX / n) * n;
    std::uint64_t v;
    do {
      v = eng_();
    } while (v >= limit);
    return v % n;
  }

  // Box-Muller; draws two uniforms per call and discards the second variate.
  double normal(double mean, double stddev) {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(2.0 * M_PI * u2);
  }

  // Knuth's product method; adequate for the small means used here.
  std::uint64_t poisson(double mean) {
    if (mean < 0.0) throw ValidationError("poisson: mean must be non-negative");
    if (mean == 0.0) return 0;
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform();
    } while (p > limit);
    return k - 1;
  }

  // Index sampled proportionally to non-negative weights.
  std::size_t weighted_index(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) throw ValidationError("weighted_index: total weight must be positive");
    const double r = uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      if (r < acc) return i;
    }
    return weights.size() - 1;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace accessopt
