#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "sc2/config.hpp"
#include "sc2/info_map.hpp"
#include "sc2/rng.hpp"

namespace sc2 {

// Deterministic fallback policy for running missions without a trained
// checkpoint. Greedy over a fan of candidate headings: steer toward the
// largest perception deficit visible in the local observation while avoiding
// the obstacle channel (neighbors and the communication boundary both read as
// obstacles there). A tiny seeded score jitter breaks symmetric ties, which
// is what differentiates paired mission seeds.
class ScriptedPolicy {
 public:
  explicit ScriptedPolicy(uint64_t seed, int directions = 16, double jitter = 1e-3)
      : rng_(Rng::derive(seed, 0x5c7172ed)), k_(directions), jitter_(jitter) {}

  double operator()(const LocalObservation& obs) {
    const int d = obs.d;
    const double c = (d - 1) * 0.5;
    const double probe_r = 0.35 * d;  // look-ahead distance, obs cells
    const double patch_r = 0.25 * d;  // scoring neighborhood radius
    const int pr = static_cast<int>(std::ceil(patch_r));

    double best_score = -1e300;
    double best_heading = 0.0;
    for (int k = 0; k < k_; ++k) {
      const double a = 2.0 * M_PI * k / k_ - M_PI;  // [-pi, pi)
      const double px = c + probe_r * std::cos(a);
      const double py = c + probe_r * std::sin(a);
      double score = 0.0;
      for (int dy = -pr; dy <= pr; ++dy)
        for (int dx = -pr; dx <= pr; ++dx) {
          if (dx * dx + dy * dy > patch_r * patch_r) continue;
          const int ix = static_cast<int>(std::lround(px)) + dx;
          const int iy = static_cast<int>(std::lround(py)) + dy;
          double perc = 0.0, obst = 1.0;  // outside the window: covered nothing, obstacle
          if (ix >= 0 && ix < d && iy >= 0 && iy < d) {
            perc = obs.perception[static_cast<size_t>(iy) * d + ix];
            obst = obs.obstacle[static_cast<size_t>(iy) * d + ix];
          }
          score += (1.0 - perc) * (1.0 - obst) - 3.0 * obst;
        }
      score += jitter_ * rng_.uniform();
      if (score > best_score) {
        best_score = score;
        best_heading = a / M_PI;
      }
    }
    return best_heading;
  }

 private:
  Rng rng_;
  int k_;
  double jitter_;
};

}  // namespace sc2
