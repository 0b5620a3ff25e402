#pragma once

#include <cmath>
#include <cstdint>

namespace sc2 {

// Deterministic PRNG (splitmix64 core). Self-contained so that runs are
// byte-reproducible regardless of standard-library implementation details.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : state_(seed) {}

  // Derive an independent stream from (seed, lane ids). Used by sweeps so each
  // (n, repetition) pair gets its own reproducible stream.
  static Rng derive(uint64_t seed, uint64_t a, uint64_t b = 0) {
    Rng r(seed ^ (0x9E3779B97F4A7C15ULL * (a + 1)) ^ (0xBF58476D1CE4E5B9ULL * (b + 1)));
    r.next_u64();  // decorrelate nearby seeds
    return r;
  }

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

  // Uniform integer in [0, n).
  uint64_t below(uint64_t n) { return n ? next_u64() % n : 0; }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(below(static_cast<uint64_t>(hi - lo + 1)));
  }

  // Standard normal via Box-Muller.
  double gaussian() {
    double u1 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }

  uint64_t state() const { return state_; }

 private:
  uint64_t state_;
};

}  // namespace sc2
