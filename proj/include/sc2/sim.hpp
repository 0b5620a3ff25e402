#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "sc2/learner.hpp"
#include "sc2/config.hpp"
#include "sc2/drone.hpp"
#include "sc2/info_map.hpp"
#include "sc2/metrics.hpp"
#include "sc2/mode_control.hpp"
#include "sc2/rover_path.hpp"
#include "sc2/scenario.hpp"
#include "sc2/scheduler.hpp"
#include "sc2/slots.hpp"
#include "sc2/vec2.hpp"

namespace sc2 {

// Fatal scheduling failure: the per-step audit or the allocation itself could
// not be satisfied.
struct AuditFailure : std::runtime_error {
  explicit AuditFailure(const std::string& m) : std::runtime_error(m) {}
};

struct RewardTerms {
  double r_c = 0.0;
  double r_e = 0.0;
  double r_p = 0.0;
  double total = 0.0;
};

// Reward for drone i at the current step. r_c compares the fleet-updated map
// mass against n copies of the single-drone plateau; r_e is the mass drone i
// alone added this step; r_p penalizes leaving the communication range by the
// distance to the rover and any airborne pair closer than the safety radius
// by a flat -200 (the collision branch dominates when both fire).
inline RewardTerms reward_terms(size_t i, const std::vector<DroneState>& fleet, Vec2 rover,
                                double map_sum_after, double marginal_i,
                                double baseline_sum, const MissionConfig& cfg) {
  RewardTerms r;
  const double denom = static_cast<double>(fleet.size()) * baseline_sum;
  r.r_c = denom > 0 ? (map_sum_after - denom) / denom : 0.0;
  r.r_e = marginal_i;

  bool collided = false;
  if (fleet[i].mode != Mode::Charge) {
    for (size_t j = 0; j < fleet.size(); ++j) {
      if (j == i || fleet[j].mode == Mode::Charge) continue;
      if (distance(fleet[i].p, fleet[j].p) < cfg.r_o) {
        collided = true;
        break;
      }
    }
  }
  const double rover_dist = distance(fleet[i].p, rover);
  if (collided)
    r.r_p = -200.0;
  else if (rover_dist > cfg.r_c)
    r.r_p = -rover_dist;
  r.total = cfg.omega_c * r.r_c + cfg.omega_e * r.r_e + r.r_p;
  return r;
}

struct MissionResult {
  MetricsReport metrics;
  std::vector<DroneState> final_fleet;
};

// Closed-loop mission driver. Per step: decay + fleet sensing and all metric
// accounting at the current poses, then the frame shifts with the rover, the
// mode ring updates, the slot allocation re-solves, and every drone takes its
// action. Missions are deterministic: any randomness lives inside the policy.
class MissionEngine {
 public:
  MissionEngine(const MissionConfig& cfg, const Scenario& scenario, Policy policy)
      : cfg_(cfg),
        path_(scenario.rover_path()),
        steps_(scenario.steps),
        policy_(std::move(policy)) {
    if (scenario.fleet_size > 0) cfg_.n = scenario.fleet_size;
    cfg_.validate();

    const Vec2 r0 = rover_position(path_, 0, cfg_);
    map_ = make_info_map(cfg_, r0);
    if (scenario.has_value) fuse_value_map(map_, scenario.value);
    world_ = WorldCoverage(path_, map_.frame, cfg_);
    effective_ = EffectiveCoverage(cfg_.n, map_.frame);
    baseline_sum_ = baseline_map(cfg_);

    fleet_.assign(static_cast<size_t>(cfg_.n), DroneState{});
    for (auto& d : fleet_) d.p = r0;
    prev_mode_.assign(fleet_.size(), Mode::Charge);
    prev_slot_.assign(fleet_.size(), std::nullopt);

    launch_gap_ = static_cast<int>(std::ceil(cfg_.r_o / (cfg_.v_a * cfg_.dt)));
  }

  // Write mission_log.csv / events.csv and optional PGM snapshots under dir.
  void enable_logging(const std::string& dir, int snapshot_every) {
    log_.open(dir + "/mission_log.csv");
    events_.open(dir + "/events.csv");
    if (!log_ || !events_) throw std::runtime_error("cannot open mission logs under " + dir);
    log_.precision(17);
    events_.precision(17);
    log_ << "step,drone,x,y,mode,t_i,slot,r_c,r_e,r_p,r\n";
    events_ << "step,drone,from,to,dist,t_i,margin\n";
    snapshot_dir_ = dir;
    snapshot_every_ = snapshot_every;
  }

  void set_track_effective(bool on) { track_effective_ = on; }

  const MissionConfig& config() const { return cfg_; }
  const WorldCoverage& world() const { return world_; }
  const InfoMap& map() const { return map_; }

  MissionResult run() {
    for (int t = 0; t < steps_; ++t) step(t);
    MissionResult out;
    out.metrics = std::move(report_);
    out.metrics.steps = steps_;
    out.metrics.fleet = cfg_.n;
    out.metrics.effective_coverage = effective_.finalize(steps_);
    out.metrics.gamma_cum = world_.gamma_cum();
    out.metrics.gamma_cum_series = world_.gamma_cum_series();
    out.metrics.gamma_avg = steps_ > 0 ? gamma_avg_accum_ / steps_ : 0.0;
    out.final_fleet = fleet_;
    return out;
  }

 private:
  void step(int t) {
    const Vec2 rover = rover_position(path_, t, cfg_);

    // Sense at the current poses; marginals feed the per-drone rewards.
    const SensingResult sensed = apply_sensing(map_, fleet_, cfg_);
    if (track_effective_) effective_.step(map_.frame, fleet_, cfg_);
    world_.update(map_, rover, cfg_);
    const double inst = instant_coverage_ratio(map_, rover, cfg_);
    gamma_avg_accum_ += inst;
    report_.gamma_avg_series.push_back(inst);

    for (size_t i = 0; i < fleet_.size(); ++i) {
      const RewardTerms r = reward_terms(i, fleet_, rover, sensed.sum_after,
                                         sensed.marginal[i], baseline_sum_, cfg_);
      if (r.r_p == -200.0) ++report_.collision_events;
      if (fleet_[i].mode != Mode::Charge && distance(fleet_[i].p, rover) > cfg_.r_c)
        ++report_.connectivity_events;
      if (log_.is_open()) {
        const DroneState& d = fleet_[i];
        log_ << t << "," << i << "," << d.p.x << "," << d.p.y << "," << mode_name(d.mode)
             << "," << d.t_i << "," << (d.slot ? std::to_string(*d.slot) : "-") << ","
             << r.r_c << "," << r.r_e << "," << r.r_p << "," << r.total << "\n";
      }
    }
    if (snapshot_every_ > 0 && t % snapshot_every_ == 0) {
      char name[32];
      std::snprintf(name, sizeof(name), "/snap_%06d.pgm", t);
      write_pgm(map_.perception, cfg_.m_a, snapshot_dir_ + name);
    }

    // Advance the frame to the next rover pose; everything below prepares the
    // coming step.
    const Vec2 rover_next = rover_position(path_, t + 1, cfg_);
    const CellShift s = shift_map(map_, rover_next - rover);
    if (track_effective_) effective_.shift(s.sx, s.sy);

    SlotSet slots = slot_positions(path_, t + 1, cfg_);
    update_modes(t, rover_next);
    mark_occupancy(slots);
    resolve_assignments(t, slots);
    run_audit(t);

    build_obstacle(map_, fleet_, rover_next, cfg_);
    act_and_move();

    for (size_t i = 0; i < fleet_.size(); ++i) {
      prev_mode_[i] = fleet_[i].mode;
      prev_slot_[i] = fleet_[i].slot;
      if (fleet_[i].t_i > cfg_.t_a) ++report_.battery_deaths;
    }
  }

  Vec2 slot_pos_of(const DroneState& d) const {
    return d.slot ? slot_position(path_, *d.slot, cfg_) : d.p;
  }

  void update_modes(int t, Vec2 rover_next) {
    for (size_t i = 0; i < fleet_.size(); ++i) {
      DroneState& d = fleet_[i];
      if (d.mode == Mode::Charge && !d.departed) {
        // pre-departure drones ride on the rover until their launch step
        d.p = rover_next;
        if (t < static_cast<int>(i) * launch_gap_) continue;
      }
      if (d.mode == Mode::Explore && !d.slot) continue;  // assigned right below
      ModeUpdate u = update_mode(d, slot_pos_of(d), rover_next, cfg_);
      if (u.event) {
        u.event->drone = static_cast<int>(i);
        u.event->step = t;
        record_event(*u.event);
      }
      d = u.next;
    }
  }

  void record_event(const ModeTransitionEvent& ev) {
    const bool ring_ok = (ev.from == Mode::Explore && ev.to == Mode::Return) ||
                         (ev.from == Mode::Return && ev.to == Mode::Charge) ||
                         (ev.from == Mode::Charge && ev.to == Mode::Explore);
    if (!ring_ok) ++report_.ring_violations;
    if (events_.is_open())
      events_ << ev.step << "," << ev.drone << "," << mode_name(ev.from) << ","
              << mode_name(ev.to) << "," << ev.dist << "," << ev.t_i << "," << ev.margin
              << "\n";
  }

  void mark_occupancy(SlotSet& slots) const {
    for (size_t i = 0; i < fleet_.size(); ++i) {
      const DroneState& d = fleet_[i];
      if (d.slot && d.mode != Mode::Explore) {
        const int k = slots.find(*d.slot);
        if (k >= 0) slots.occupant[static_cast<size_t>(k)] = static_cast<int>(i);
      }
    }
  }

  // Re-solve the allocation for every exploring drone. If the instance has no
  // perfect matching, first try releasing pressure by sending drones whose
  // current slot is still reachable straight to Return; only if that fails is
  // the infeasibility recorded (fatal unless degraded routing is enabled).
  void resolve_assignments(int t, SlotSet& slots) {
    for (int attempt = 0; attempt < 2; ++attempt) {
      AllocationInstance inst = build_instance(fleet_, slots, path_, cfg_);
      if (inst.empty()) return;
      if (auto sol = solve(inst)) {
        for (int r = 0; r < inst.rows; ++r) {
          const int drone = inst.drone_ids[static_cast<size_t>(r)];
          const int col = sol->slot_of_drone[static_cast<size_t>(r)];
          fleet_[static_cast<size_t>(drone)].slot = inst.slot_ids[static_cast<size_t>(col)];
        }
        return;
      }
      if (attempt == 0 && force_returns(t, slots)) continue;
      ++report_.infeasible_events;
      if (cfg_.degrade_to_nearest) {
        degrade_assign(inst);
        degraded_step_ = true;
        return;
      }
      throw AuditFailure("allocation infeasible at step " + std::to_string(t));
    }
  }

  // Emergency pressure release: commit exploring drones that still hold a
  // reachable slot to Return early. Returns true if anything changed.
  bool force_returns(int t, SlotSet& slots) {
    bool changed = false;
    for (size_t i = 0; i < fleet_.size(); ++i) {
      DroneState& d = fleet_[i];
      if (d.mode != Mode::Explore || !d.slot) continue;
      const double dist = distance(d.p, slot_position(path_, *d.slot, cfg_));
      const bool battery_ok = dist / cfg_.v_a <= (cfg_.t_a - d.t_i) * cfg_.dt;
      const bool rover_ok = rover_deadline(path_, *d.slot, slots.s_rover, cfg_) >= 0.0;
      if (battery_ok && rover_ok) {
        d.mode = Mode::Return;
        ModeTransitionEvent ev;
        ev.drone = static_cast<int>(i);
        ev.step = t;
        ev.from = Mode::Explore;
        ev.to = Mode::Return;
        ev.dist = dist;
        ev.t_i = d.t_i;
        ev.margin = -1.0;  // forced, not trigger-driven
        record_event(ev);
        const int k = slots.find(*d.slot);
        if (k >= 0) slots.occupant[static_cast<size_t>(k)] = static_cast<int>(i);
        changed = true;
      }
    }
    return changed;
  }

  void degrade_assign(const AllocationInstance& inst) {
    std::vector<bool> used(static_cast<size_t>(inst.cols), false);
    for (int r = 0; r < inst.rows; ++r) {
      int best = -1;
      for (int k = 0; k < inst.cols; ++k) {
        if (used[static_cast<size_t>(k)]) continue;
        if (best < 0 || inst.at(r, k) < inst.at(r, best)) best = k;
      }
      if (best < 0) continue;
      used[static_cast<size_t>(best)] = true;
      fleet_[static_cast<size_t>(inst.drone_ids[static_cast<size_t>(r)])].slot =
          inst.slot_ids[static_cast<size_t>(best)];
    }
  }

  void run_audit(int t) {
    if (degraded_step_) {  // degraded routing knowingly breaks the deadline bounds
      degraded_step_ = false;
      return;
    }
    const double s_rover = path_.arc_length_at_step(t + 1, cfg_);
    const AuditReport rep =
        audit_feasibility(fleet_, s_rover, path_, prev_slot_, prev_mode_, cfg_);
    if (!rep.ok) {
      std::string what = "audit failure at step " + std::to_string(t) + ":";
      for (const auto& v : rep.violations) what += " [" + v + "]";
      throw AuditFailure(what);
    }
  }

  void act_and_move() {
    for (size_t i = 0; i < fleet_.size(); ++i) {
      DroneState& d = fleet_[i];
      if (d.mode == Mode::Charge) continue;
      std::optional<double> psi;
      if (d.mode == Mode::Explore) {
        const LocalObservation obs = clip_local(map_, d.p, cfg_.obs_size, cfg_);
        psi = select_action(d, obs, policy_, slot_pos_of(d));
      } else {
        static const LocalObservation kEmpty{};
        psi = select_action(d, kEmpty, policy_, slot_pos_of(d));
      }
      if (psi) d = step_kinematics(d, *psi, cfg_);
    }
  }

  MissionConfig cfg_;
  RoverPath path_;
  int steps_;
  Policy policy_;

  InfoMap map_;
  WorldCoverage world_;
  EffectiveCoverage effective_;
  double baseline_sum_ = 0.0;
  std::vector<DroneState> fleet_;
  std::vector<Mode> prev_mode_;
  std::vector<std::optional<int64_t>> prev_slot_;
  int launch_gap_ = 1;
  bool track_effective_ = true;
  bool degraded_step_ = false;

  MetricsReport report_;
  double gamma_avg_accum_ = 0.0;

  std::ofstream log_, events_;
  std::string snapshot_dir_;
  int snapshot_every_ = 0;
};

// Randomized all-explore training episodes: a fresh fleet size, rover pose,
// straight-line track and spread-out drone spawns every reset. No charging
// machinery; an episode ends at t_a steps or at the first collision, whose
// transitions are marked terminal for the bootstrap cut.
class TrainingEnv {
 public:
  explicit TrainingEnv(const MissionConfig& cfg) : cfg_(cfg) {
    baseline_sum_ = baseline_map(cfg_);
  }

  void reset(Rng& rng) {
    n_ = rng.uniform_int(cfg_.n_min, cfg_.n_max);
    const Vec2 r0{rng.uniform(-50.0, 50.0), rng.uniform(-50.0, 50.0)};
    const double th = rng.uniform(-M_PI, M_PI);
    path_ = straight_path(r0, {std::cos(th), std::sin(th)},
                          cfg_.v_r * cfg_.dt * cfg_.t_a * 1.5);
    t_ = 0;
    map_ = make_info_map(cfg_, r0);

    fleet_.assign(static_cast<size_t>(n_), DroneState{});
    for (size_t i = 0; i < fleet_.size(); ++i) {
      DroneState& d = fleet_[i];
      d.mode = Mode::Explore;
      d.departed = true;
      for (int tries = 0; tries < 64; ++tries) {
        const double ang = rng.uniform(-M_PI, M_PI);
        const double rad = cfg_.r_c * 1.2 * std::sqrt(rng.uniform(0.0, 1.0));
        d.p = r0 + Vec2{std::cos(ang), std::sin(ang)} * rad;
        bool clear = true;
        for (size_t j = 0; j < i; ++j)
          if (distance(fleet_[j].p, d.p) < 2.0 * cfg_.r_o) clear = false;
        if (clear) break;
      }
    }
    build_obstacle(map_, fleet_, r0, cfg_);
  }

  int fleet_size() const { return n_; }

  void observe(int i, std::vector<double>& out) const {
    clip_local(map_, fleet_[static_cast<size_t>(i)].p, cfg_.obs_size, cfg_).to_input(out);
  }

  StepOutcome step(const std::vector<double>& headings) {
    for (size_t i = 0; i < fleet_.size(); ++i)
      fleet_[i] = step_kinematics(fleet_[i], headings[i], cfg_);

    const Vec2 rover_prev = rover_position(path_, t_, cfg_);
    ++t_;
    const Vec2 rover = rover_position(path_, t_, cfg_);
    shift_map(map_, rover - rover_prev);
    const SensingResult sensed = apply_sensing(map_, fleet_, cfg_);
    build_obstacle(map_, fleet_, rover, cfg_);

    StepOutcome out;
    out.reward.resize(fleet_.size());
    out.terminal.assign(fleet_.size(), 0);
    for (size_t i = 0; i < fleet_.size(); ++i) {
      const RewardTerms r = reward_terms(i, fleet_, rover, sensed.sum_after,
                                         sensed.marginal[i], baseline_sum_, cfg_);
      out.reward[i] = r.total;
      if (r.r_p == -200.0) {
        out.terminal[i] = 1;
        out.episode_done = true;
      }
    }
    return out;
  }

 private:
  MissionConfig cfg_;
  double baseline_sum_ = 0.0;
  int n_ = 0;
  int t_ = 0;
  RoverPath path_;
  InfoMap map_;
  std::vector<DroneState> fleet_;
};

struct SweepRow {
  int n = 0;
  uint64_t seed = 0;
  double gamma_cum = 0.0;
  double gamma_avg = 0.0;
  double effective_coverage = 0.0;
};

using PolicyFactory = std::function<Policy(uint64_t run_seed, const MissionConfig& run_cfg)>;

// One mission per (n, seed) pair, rows ordered by (n, seed) regardless of how
// the work was scheduled. Each run derives its own policy stream from
// (config seed, n, repetition).
inline std::vector<SweepRow> sweep_fleet(const PolicyFactory& factory,
                                         const MissionConfig& cfg, const Scenario& scenario,
                                         const std::vector<int>& n_list, int seed_count,
                                         int threads) {
  struct Job {
    int n;
    int rep;
  };
  std::vector<Job> jobs;
  for (int n : n_list)
    for (int rep = 0; rep < seed_count; ++rep) jobs.push_back({n, rep});
  std::vector<SweepRow> rows(jobs.size());

  std::atomic<size_t> next{0};
  const auto worker = [&]() {
    for (;;) {
      const size_t j = next.fetch_add(1);
      if (j >= jobs.size()) return;
      const Job job = jobs[j];
      MissionConfig run_cfg = cfg;
      run_cfg.n = job.n;
      Scenario sc = scenario;
      sc.fleet_size = job.n;
      const uint64_t run_seed =
          Rng::derive(cfg.seed, static_cast<uint64_t>(job.n), static_cast<uint64_t>(job.rep))
              .state();
      MissionEngine engine(run_cfg, sc, factory(run_seed, run_cfg));
      engine.set_track_effective(true);
      const MissionResult res = engine.run();
      rows[j] = {job.n, run_seed, res.metrics.gamma_cum, res.metrics.gamma_avg,
                 res.metrics.effective_coverage};
    }
  };

  const int nthreads = std::max(1, std::min<int>(threads, static_cast<int>(jobs.size())));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(nthreads));
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return rows;
}

}  // namespace sc2
