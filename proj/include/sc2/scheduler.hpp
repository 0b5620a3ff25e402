#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sc2/config.hpp"
#include "sc2/drone.hpp"
#include "sc2/rover_path.hpp"
#include "sc2/slots.hpp"
#include "sc2/vec2.hpp"

namespace sc2 {

// One charging-slot allocation problem: exploring drones against free slots,
// straight-line distances, with edges forbidden wherever the drone could not
// land before the rover rolls past the slot or before its endurance runs out.
struct AllocationInstance {
  std::vector<int> drone_ids;     // caller's fleet indices
  std::vector<int64_t> slot_ids;  // global slot lattice indices
  int rows = 0;                   // drones
  int cols = 0;                   // slots
  std::vector<double> cost;       // rows*cols, row-major distances (m)
  std::vector<uint8_t> forbidden; // rows*cols

  double& at(int i, int k) { return cost[static_cast<size_t>(i) * cols + k]; }
  double at(int i, int k) const { return cost[static_cast<size_t>(i) * cols + k]; }
  bool banned(int i, int k) const { return forbidden[static_cast<size_t>(i) * cols + k] != 0; }
  void ban(int i, int k) { forbidden[static_cast<size_t>(i) * cols + k] = 1; }
  bool empty() const { return rows == 0; }
};

struct Assignment {
  std::vector<int> slot_of_drone;  // column index per instance row
  double total_cost = 0.0;
};

// Drones still exploring get (advisory) slots; anything not exploring is out
// of the pool, and so is any slot already claimed by a returning or charging
// drone. The endurance side of the reachability deadline is tightened by the
// return-trigger margin so that a slot assigned this step is still in reach
// after one adversarial step of exploration.
inline AllocationInstance build_instance(const std::vector<DroneState>& fleet,
                                         const SlotSet& slots, const RoverPath& path,
                                         const MissionConfig& cfg) {
  AllocationInstance inst;
  for (size_t i = 0; i < fleet.size(); ++i)
    if (fleet[i].mode == Mode::Explore) inst.drone_ids.push_back(static_cast<int>(i));
  for (int k = 0; k < slots.count(); ++k)
    if (!slots.occupant[static_cast<size_t>(k)])
      inst.slot_ids.push_back(slots.index[static_cast<size_t>(k)]);

  inst.rows = static_cast<int>(inst.drone_ids.size());
  inst.cols = static_cast<int>(inst.slot_ids.size());
  inst.cost.assign(static_cast<size_t>(inst.rows) * inst.cols, 0.0);
  inst.forbidden.assign(static_cast<size_t>(inst.rows) * inst.cols, 0);

  for (int i = 0; i < inst.rows; ++i) {
    const DroneState& d = fleet[static_cast<size_t>(inst.drone_ids[static_cast<size_t>(i)])];
    const double battery_s = (cfg.t_a - d.t_i - cfg.return_margin) * cfg.dt;
    for (int k = 0; k < inst.cols; ++k) {
      const int64_t g = inst.slot_ids[static_cast<size_t>(k)];
      const double dist = distance(d.p, slot_position(path, g, cfg));
      inst.at(i, k) = dist;
      const double deadline = std::min(rover_deadline(path, g, slots.s_rover, cfg), battery_s);
      if (dist / cfg.v_a > deadline) inst.ban(i, k);
    }
  }
  return inst;
}

namespace detail {

// Cost carrying a lexicographic tie-break component. Ordering is (distance,
// tie); addition is componentwise, which keeps the assignment problem a
// linear program over an ordered group.
struct TieCost {
  double d = 0.0;
  __int128 t = 0;

  TieCost operator+(const TieCost& o) const { return {d + o.d, t + o.t}; }
  TieCost operator-(const TieCost& o) const { return {d - o.d, t - o.t}; }
  bool operator<(const TieCost& o) const { return d < o.d || (d == o.d && t < o.t); }
};

inline bool is_inf(const TieCost& c) { return std::isinf(c.d); }

}  // namespace detail

// Exact min-total-distance matching of every drone to a distinct feasible
// slot (shortest augmenting path with potentials). Among equal-cost optima
// the result is lexicographically smallest by (drone index, slot index),
// encoded as a positional tie-break term so a single solve suffices. Returns
// nullopt when some drone cannot be matched.
inline std::optional<Assignment> solve(const AllocationInstance& inst) {
  Assignment out;
  if (inst.empty()) return out;
  const int n = inst.rows;
  const int m = inst.cols;
  if (n > m) return std::nullopt;

  // Positional weights W^(n-1-i) with W > m make sum-minimization of the tie
  // term equal to lexicographic minimization of the slot vector. Disabled for
  // instances large enough to overflow (ties then fall back to scan order,
  // still deterministic).
  const double bits = n * std::log2(static_cast<double>(m) + 1.0);
  const bool use_tie = bits < 120.0;
  std::vector<__int128> row_weight(static_cast<size_t>(n), 0);
  if (use_tie) {
    __int128 w = 1;
    for (int i = n - 1; i >= 0; --i) {
      row_weight[static_cast<size_t>(i)] = w;
      w *= (m + 1);
    }
  }
  const auto edge_cost = [&](int i, int k) -> detail::TieCost {
    if (inst.banned(i, k)) return {std::numeric_limits<double>::infinity(), 0};
    return {inst.at(i, k), use_tie ? row_weight[static_cast<size_t>(i)] * (k + 1) : 0};
  };

  const detail::TieCost INF{std::numeric_limits<double>::infinity(), 0};
  std::vector<detail::TieCost> u(static_cast<size_t>(n) + 1), v(static_cast<size_t>(m) + 1);
  std::vector<int> match(static_cast<size_t>(m) + 1, 0);  // 1-based row matched to column
  std::vector<int> way(static_cast<size_t>(m) + 1, 0);

  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<detail::TieCost> minv(static_cast<size_t>(m) + 1, INF);
    std::vector<bool> used(static_cast<size_t>(m) + 1, false);
    do {
      used[static_cast<size_t>(j0)] = true;
      const int i0 = match[static_cast<size_t>(j0)];
      detail::TieCost delta = INF;
      int j1 = -1;
      for (int j = 1; j <= m; ++j) {
        if (used[static_cast<size_t>(j)]) continue;
        const detail::TieCost ec = edge_cost(i0 - 1, j - 1);
        if (!detail::is_inf(ec)) {
          const detail::TieCost cur = ec - u[static_cast<size_t>(i0)] - v[static_cast<size_t>(j)];
          if (cur < minv[static_cast<size_t>(j)]) {
            minv[static_cast<size_t>(j)] = cur;
            way[static_cast<size_t>(j)] = j0;
          }
        }
        if (minv[static_cast<size_t>(j)] < delta) {
          delta = minv[static_cast<size_t>(j)];
          j1 = j;
        }
      }
      if (j1 < 0 || detail::is_inf(delta)) return std::nullopt;
      for (int j = 0; j <= m; ++j) {
        if (used[static_cast<size_t>(j)]) {
          u[static_cast<size_t>(match[static_cast<size_t>(j)])] =
              u[static_cast<size_t>(match[static_cast<size_t>(j)])] + delta;
          v[static_cast<size_t>(j)] = v[static_cast<size_t>(j)] - delta;
        } else {
          minv[static_cast<size_t>(j)] = minv[static_cast<size_t>(j)] - delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<size_t>(j0)];
      match[static_cast<size_t>(j0)] = match[static_cast<size_t>(j1)];
      j0 = j1;
    } while (j0);
  }

  out.slot_of_drone.assign(static_cast<size_t>(n), -1);
  for (int j = 1; j <= m; ++j)
    if (match[static_cast<size_t>(j)] > 0)
      out.slot_of_drone[static_cast<size_t>(match[static_cast<size_t>(j)] - 1)] = j - 1;
  out.total_cost = 0.0;
  for (int i = 0; i < n; ++i) {
    const int k = out.slot_of_drone[static_cast<size_t>(i)];
    if (k < 0 || inst.banned(i, k)) return std::nullopt;
    out.total_cost += inst.at(i, k);
  }
  return out;
}

// Exhaustive enumeration in lexicographic order with strict improvement, so
// it lands on the same lexicographically-first optimum the solver documents.
// Only meant for small instances.
inline std::optional<Assignment> brute_force_solve(const AllocationInstance& inst) {
  Assignment best;
  if (inst.empty()) return best;
  const int n = inst.rows;
  const int m = inst.cols;
  if (n > m) return std::nullopt;

  std::vector<int> pick(static_cast<size_t>(n), -1);
  std::vector<bool> taken(static_cast<size_t>(m), false);
  bool found = false;
  double best_cost = std::numeric_limits<double>::infinity();
  std::vector<int> best_pick;

  const auto rec = [&](auto&& self, int i, double acc) -> void {
    if (i == n) {
      if (!found || acc < best_cost) {
        found = true;
        best_cost = acc;
        best_pick = pick;
      }
      return;
    }
    for (int k = 0; k < m; ++k) {
      if (taken[static_cast<size_t>(k)] || inst.banned(i, k)) continue;
      taken[static_cast<size_t>(k)] = true;
      pick[static_cast<size_t>(i)] = k;
      self(self, i + 1, acc + inst.at(i, k));
      taken[static_cast<size_t>(k)] = false;
    }
  };
  rec(rec, 0, 0.0);
  if (!found) return std::nullopt;
  best.slot_of_drone = best_pick;
  best.total_cost = best_cost;
  return best;
}

struct AuditReport {
  bool ok = true;
  std::vector<std::string> violations;

  void fail(const std::string& what) {
    ok = false;
    violations.push_back(what);
  }
};

// Per-step feasibility audit mirroring the induction that guarantees a
// conflict-free schedule: exploring drones hold reachable slots (on both the
// endurance and the rover clock), committed drones keep theirs, fresh
// departures start with zero consumed endurance, and no slot is claimed
// twice. Run after mode updates and re-solve.
inline AuditReport audit_feasibility(const std::vector<DroneState>& fleet, double s_rover,
                                     const RoverPath& path,
                                     const std::vector<std::optional<int64_t>>& prev_slot,
                                     const std::vector<Mode>& prev_mode,
                                     const MissionConfig& cfg) {
  AuditReport rep;
  std::vector<int64_t> locked;
  for (size_t i = 0; i < fleet.size(); ++i) {
    const DroneState& d = fleet[i];
    const std::string who = "drone " + std::to_string(i);
    if (d.t_i > cfg.t_a) rep.fail(who + ": endurance exceeded (t_i=" + std::to_string(d.t_i) + ")");

    if (d.mode == Mode::Explore && d.departed) {
      if (!d.slot) {
        rep.fail(who + ": exploring without an assigned slot");
        continue;
      }
      const double dist = distance(d.p, slot_position(path, *d.slot, cfg));
      if (dist / cfg.v_a > (cfg.t_a - d.t_i) * cfg.dt)
        rep.fail(who + ": assigned slot no longer reachable on endurance");
      if (dist / cfg.v_a > rover_deadline(path, *d.slot, s_rover, cfg))
        rep.fail(who + ": assigned slot unreachable before the rover rolls past");
      // fresh departure must restart the endurance clock
      if (prev_mode[i] == Mode::Charge && d.t_i != 0)
        rep.fail(who + ": departed with nonzero endurance consumed");
    } else if (d.mode == Mode::Return) {
      if (!d.slot) {
        rep.fail(who + ": returning without a slot");
        continue;
      }
      if (prev_mode[i] == Mode::Return && prev_slot[i] != d.slot)
        rep.fail(who + ": committed slot changed while returning");
      const double dist = distance(d.p, slot_position(path, *d.slot, cfg));
      if (dist / cfg.v_a > (cfg.t_a - d.t_i) * cfg.dt)
        rep.fail(who + ": committed slot no longer reachable on endurance");
      locked.push_back(*d.slot);
    } else if (d.mode == Mode::Charge && d.slot) {
      if (prev_mode[i] == Mode::Charge && prev_slot[i] != d.slot)
        rep.fail(who + ": slot changed while charging");
      if (distance(d.p, slot_position(path, *d.slot, cfg)) > cfg.arrival_eps())
        rep.fail(who + ": charging away from its slot");
      locked.push_back(*d.slot);
    }
  }
  for (size_t a = 0; a < locked.size(); ++a)
    for (size_t b = a + 1; b < locked.size(); ++b)
      if (locked[a] == locked[b])
        rep.fail("slot " + std::to_string(locked[a]) + " claimed twice");
  return rep;
}

}  // namespace sc2
