#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>

#include "sc2/config.hpp"
#include "sc2/drone.hpp"
#include "sc2/info_map.hpp"
#include "sc2/vec2.hpp"

namespace sc2 {

// Record of one step of the Explore -> Return -> Charge -> Explore ring.
struct ModeTransitionEvent {
  int drone = -1;
  int step = -1;
  Mode from = Mode::Explore;
  Mode to = Mode::Explore;
  double dist = 0.0;      // distance that drove the trigger, m
  int t_i = 0;            // endurance consumed at the transition
  double margin = 0.0;    // slack left on the trigger inequality
};

struct ModeUpdate {
  DroneState next;
  std::optional<ModeTransitionEvent> event;
};

// The three ring transitions, checked in order, at most one per step:
//   Explore -> Return when the slot is about to fall out of endurance range,
//   Return  -> Charge on arrival at the slot,
//   Charge  -> Explore when the rover rolls over the parked drone.
// Landing snaps the drone onto the slot point; leaving resets the endurance
// clock. `launch_allowed` gates the initial staggered departures.
inline ModeUpdate update_mode(const DroneState& s, Vec2 slot_pos, Vec2 rover_pos,
                              const MissionConfig& cfg, bool launch_allowed = true) {
  ModeUpdate out{s, std::nullopt};
  ModeTransitionEvent ev;
  ev.from = s.mode;
  ev.t_i = s.t_i;

  switch (s.mode) {
    case Mode::Explore: {
      if (!s.slot) throw std::logic_error("exploring drone has no assigned slot");
      const double d = distance(s.p, slot_pos);
      const double budget = (cfg.t_a - s.t_i - cfg.return_margin) * cfg.dt;
      if (d / cfg.v_a > budget) {
        out.next.mode = Mode::Return;
        ev.to = Mode::Return;
        ev.dist = d;
        ev.margin = d / cfg.v_a - budget;
        out.event = ev;
      }
      break;
    }
    case Mode::Return: {
      if (!s.slot) throw std::logic_error("returning drone has no assigned slot");
      const double d = distance(s.p, slot_pos);
      if (d < cfg.arrival_eps()) {
        out.next.mode = Mode::Charge;
        out.next.p = slot_pos;  // land exactly on the pad
        ev.to = Mode::Charge;
        ev.dist = d;
        ev.margin = cfg.arrival_eps() - d;
        out.event = ev;
      }
      break;
    }
    case Mode::Charge: {
      const double d = distance(s.p, rover_pos);
      if (launch_allowed && d < cfg.arrival_eps()) {
        out.next.mode = Mode::Explore;
        out.next.t_i = 0;
        out.next.slot.reset();   // a fresh assignment follows this step
        out.next.departed = true;
        ev.to = Mode::Explore;
        ev.dist = d;
        ev.margin = cfg.arrival_eps() - d;
        out.event = ev;
      }
      break;
    }
  }
  return out;
}

using Policy = std::function<double(const LocalObservation&)>;

// Per-mode action: exploring drones ask the policy, returning drones fly the
// bearing to their slot, charging drones hold position (nullopt).
inline std::optional<double> select_action(const DroneState& s, const LocalObservation& obs,
                                           const Policy& policy, Vec2 slot_pos) {
  switch (s.mode) {
    case Mode::Explore:
      return wrap_heading(policy(obs));
    case Mode::Return: {
      const Vec2 to = slot_pos - s.p;
      return wrap_heading(std::atan2(to.y, to.x) / M_PI);
    }
    case Mode::Charge:
      return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace sc2
