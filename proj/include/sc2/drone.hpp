#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "sc2/config.hpp"
#include "sc2/vec2.hpp"

namespace sc2 {

enum class Mode : uint8_t { Explore, Return, Charge };

inline const char* mode_name(Mode m) {
  switch (m) {
    case Mode::Explore: return "Explore";
    case Mode::Return: return "Return";
    case Mode::Charge: return "Charge";
  }
  return "?";
}

// Normalized heading lives in [-1, 1); the physical angle is pi * psi.
inline double wrap_heading(double psi) {
  psi = std::fmod(psi + 1.0, 2.0);
  if (psi < 0.0) psi += 2.0;
  return psi - 1.0;
}

struct DroneState {
  Vec2 p;                      // position, m
  double psi = 0.0;            // last commanded heading, normalized
  int t_i = 0;                 // consumed endurance, steps
  Mode mode = Mode::Charge;
  std::optional<int64_t> slot; // assigned slot (global lattice index)
  bool departed = false;       // has left the rover at least once
};

// Constant-speed step: displacement magnitude is exactly v_a*dt for every
// heading. Endurance is consumed except while parked on a slot.
inline DroneState step_kinematics(const DroneState& s, double psi_cmd,
                                  const MissionConfig& cfg) {
  DroneState out = s;
  if (s.mode != Mode::Charge) {
    const double a = M_PI * psi_cmd;
    out.p = s.p + Vec2{std::cos(a), std::sin(a)} * (cfg.v_a * cfg.dt);
    out.psi = psi_cmd;
    out.t_i = s.t_i + 1;
  }
  return out;
}

}  // namespace sc2
