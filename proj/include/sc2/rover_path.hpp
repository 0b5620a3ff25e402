#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "sc2/config.hpp"
#include "sc2/vec2.hpp"

namespace sc2 {

// Piecewise-linear rover track, parameterized by arc length. Queries past the
// end clamp to the final waypoint, so missions longer than the track stay
// well-defined (the rover parks).
class RoverPath {
 public:
  RoverPath() = default;

  explicit RoverPath(std::vector<Vec2> waypoints) : pts_(std::move(waypoints)) {
    if (pts_.empty()) throw std::invalid_argument("RoverPath needs at least one waypoint");
    cum_.resize(pts_.size(), 0.0);
    for (size_t i = 1; i < pts_.size(); ++i)
      cum_[i] = cum_[i - 1] + distance(pts_[i - 1], pts_[i]);
  }

  const std::vector<Vec2>& waypoints() const { return pts_; }
  double total_length() const { return cum_.back(); }

  // Point at arc length s, clamped to [0, total_length].
  Vec2 position_at(double s) const {
    if (s <= 0.0 || pts_.size() == 1) return pts_.front();
    if (s >= cum_.back()) return pts_.back();
    size_t hi = 1;
    while (cum_[hi] < s) ++hi;
    const double seg = cum_[hi] - cum_[hi - 1];
    const double f = seg > 0 ? (s - cum_[hi - 1]) / seg : 0.0;
    return pts_[hi - 1] + (pts_[hi] - pts_[hi - 1]) * f;
  }

  double arc_length_at_step(int t, const MissionConfig& cfg) const {
    const double s = cfg.v_r * cfg.dt * static_cast<double>(t);
    return s > total_length() ? total_length() : s;
  }

 private:
  std::vector<Vec2> pts_;
  std::vector<double> cum_;
};

// Rover position after t steps of constant-speed travel along the path.
inline Vec2 rover_position(const RoverPath& path, int t, const MissionConfig& cfg) {
  return path.position_at(path.arc_length_at_step(t, cfg));
}

inline RoverPath straight_path(Vec2 start, Vec2 heading_unit, double length) {
  return RoverPath({start, start + heading_unit * length});
}

}  // namespace sc2
