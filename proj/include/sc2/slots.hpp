#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "sc2/config.hpp"
#include "sc2/rover_path.hpp"
#include "sc2/vec2.hpp"

namespace sc2 {

// Charging slot candidates. Slots live on a fixed d_tau lattice along the
// path (slot g sits at arc length g*d_tau), so a slot keeps its identity and
// position once a drone commits to it. The candidate window at time t is the
// n_tau lattice slots strictly ahead of the rover; positions past the end of
// the path clamp to the final waypoint, where the rover eventually parks.
struct SlotSet {
  int64_t base = 0;               // rover arc length in whole slot spacings
  double s_rover = 0.0;           // rover arc length, m
  std::vector<int64_t> index;     // global lattice indices, ascending
  std::vector<Vec2> pos;
  std::vector<std::optional<int>> occupant;  // filled in by the engine

  int count() const { return static_cast<int>(index.size()); }

  int find(int64_t global_index) const {
    for (int k = 0; k < count(); ++k)
      if (index[static_cast<size_t>(k)] == global_index) return k;
    return -1;
  }
};

inline double slot_arc(int64_t global_index, const MissionConfig& cfg) {
  return static_cast<double>(global_index) * cfg.d_tau;
}

inline Vec2 slot_position(const RoverPath& path, int64_t global_index,
                          const MissionConfig& cfg) {
  return path.position_at(slot_arc(global_index, cfg));
}

// Seconds until the rover rolls past the slot. Infinite when the slot's
// nominal arc is at or beyond the end of the path: the rover parks there and
// never passes it.
inline double rover_deadline(const RoverPath& path, int64_t global_index, double s_rover,
                             const MissionConfig& cfg) {
  const double arc = slot_arc(global_index, cfg);
  if (arc >= path.total_length()) return std::numeric_limits<double>::infinity();
  return (arc - s_rover) / cfg.v_r;
}

inline SlotSet slot_positions(const RoverPath& path, int t, const MissionConfig& cfg) {
  SlotSet s;
  s.s_rover = path.arc_length_at_step(t, cfg);
  s.base = static_cast<int64_t>(std::floor(s.s_rover / cfg.d_tau));
  const int n_tau = cfg.n_tau();
  s.index.reserve(static_cast<size_t>(n_tau));
  s.pos.reserve(static_cast<size_t>(n_tau));
  for (int k = 1; k <= n_tau; ++k) {
    const int64_t g = s.base + k;
    s.index.push_back(g);
    s.pos.push_back(slot_position(path, g, cfg));
  }
  s.occupant.assign(s.index.size(), std::nullopt);
  return s;
}

}  // namespace sc2
