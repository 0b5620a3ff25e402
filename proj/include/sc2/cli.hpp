#pragma once

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sc2/learner.hpp"
#include "sc2/config.hpp"
#include "sc2/manifest.hpp"
#include "sc2/scenario.hpp"
#include "sc2/scheduler.hpp"
#include "sc2/scripted_policy.hpp"
#include "sc2/sim.hpp"

namespace sc2::cli {

// Stable exit contract.
enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kCheckpointError = 3,
  kInfeasible = 4,
  kAuditFailure = 5,
};

inline int env_threads() {
  if (const char* s = std::getenv("SC2_THREADS")) {
    const int v = std::atoi(s);
    if (v > 0) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc ? static_cast<int>(hc) : 1;
}

namespace detail {

class Stopwatch {
 public:
  Stopwatch() : t0_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_;
};

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  f << text;
}

// Policy backed by a trained actor; each call is a deterministic forward
// pass on the drone's own observation.
inline Policy actor_policy(std::shared_ptr<ActorCritic> ac) {
  auto scratch = std::make_shared<std::vector<double>>();
  return [ac, scratch](const LocalObservation& obs) {
    obs.to_input(*scratch);
    return ac->actor().forward(*scratch);
  };
}

}  // namespace detail

struct TrainArgs {
  std::string config_path;
  std::string out_dir;
  std::string resume_checkpoint;  // optional
};

inline int cmd_train(const TrainArgs& a) {
  detail::Stopwatch watch;
  MissionConfig cfg;
  try {
    cfg = MissionConfig::load(a.config_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }

  std::filesystem::create_directories(a.out_dir);
  Rng rng(cfg.seed);
  ActorCritic ac;
  try {
    ac = a.resume_checkpoint.empty() ? ActorCritic(cfg, rng)
                                     : ActorCritic::load(a.resume_checkpoint, cfg);
  } catch (const CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << "\n";
    return kCheckpointError;
  }

  TrainingEnv env(cfg);
  const auto curve = train(ac, env, cfg, rng);

  const std::string ckpt = a.out_dir + "/checkpoint.json";
  const std::string curve_csv = a.out_dir + "/curve.csv";
  ac.save(ckpt);
  write_curve_csv(curve, curve_csv);
  detail::write_text(a.out_dir + "/config.json", cfg.to_json().dump(2) + "\n");

  RunManifest m;
  m.command = "train";
  m.args = {{"config", a.config_path}, {"out", a.out_dir}};
  if (!a.resume_checkpoint.empty()) {
    m.args["checkpoint"] = a.resume_checkpoint;
    m.inputs.push_back(a.resume_checkpoint);
  }
  m.config = cfg.to_json();
  m.config_digest = json_digest(m.config);
  m.seed = cfg.seed;
  m.outputs = {"checkpoint.json", "curve.csv", "config.json"};
  m.wall_clock_s = watch.seconds();
  m.write(a.out_dir + "/manifest.json");
  return kOk;
}

struct SimulateArgs {
  std::string config_path;
  std::string checkpoint;     // xor scripted
  bool scripted = false;
  std::string scenario = "line1000";
  int steps = -1;             // <0: scenario default
  int fleet = 0;              // 0: config default
  std::string value_map;      // optional CSV override
  std::string out_dir;
  int snapshot_every = 0;
};

inline int cmd_simulate(const SimulateArgs& a) {
  detail::Stopwatch watch;
  MissionConfig cfg;
  Scenario sc;
  try {
    cfg = MissionConfig::load(a.config_path);
    sc = load_scenario(a.scenario);
    if (a.steps >= 0) sc.steps = a.steps;
    if (a.fleet > 0) sc.fleet_size = a.fleet;
    if (!a.value_map.empty()) {
      sc.value = ValueField::from_grid(read_grid_csv(a.value_map));
      sc.has_value = true;
      sc.value_spec = {{"value_map", a.value_map}};
    }
    if (a.scripted == !a.checkpoint.empty()) {
      std::cerr << "config error: need exactly one of --checkpoint or --scripted-policy\n";
      return kConfigError;
    }
    if (sc.steps < 0) throw ConfigError("steps must be >= 0");
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }

  Policy policy;
  std::shared_ptr<ActorCritic> ac;
  if (a.scripted) {
    policy = ScriptedPolicy(cfg.seed);
  } else {
    try {
      ac = std::make_shared<ActorCritic>(ActorCritic::load(a.checkpoint, cfg));
    } catch (const CheckpointError& e) {
      std::cerr << "checkpoint error: " << e.what() << "\n";
      return kCheckpointError;
    }
    policy = detail::actor_policy(ac);
  }

  std::filesystem::create_directories(a.out_dir);
  try {
    MissionEngine engine(cfg, sc, policy);
    engine.enable_logging(a.out_dir, a.snapshot_every);
    const MissionResult res = engine.run();
    detail::write_text(a.out_dir + "/metrics.json", res.metrics.to_json().dump(2) + "\n");
    detail::write_text(a.out_dir + "/config.json", cfg.to_json().dump(2) + "\n");
    detail::write_text(a.out_dir + "/scenario.json", sc.to_json().dump(2) + "\n");

    RunManifest m;
    m.command = "simulate";
    m.args = {{"config", a.config_path},   {"scenario", a.scenario},
              {"steps", sc.steps},         {"n", sc.fleet_size},
              {"scripted", a.scripted},    {"checkpoint", a.checkpoint},
              {"value_map", a.value_map},  {"snapshot_every", a.snapshot_every},
              {"out", a.out_dir}};
    m.config = cfg.to_json();
    m.config_digest = json_digest(m.config);
    m.seed = cfg.seed;
    if (!a.checkpoint.empty()) m.inputs.push_back(a.checkpoint);
    if (!a.value_map.empty()) m.inputs.push_back(a.value_map);
    m.outputs = {"metrics.json", "mission_log.csv", "events.csv", "config.json",
                 "scenario.json"};
    m.wall_clock_s = watch.seconds();
    m.write(a.out_dir + "/manifest.json");
    std::cout << "scenario " << sc.name << ": n=" << (sc.fleet_size > 0 ? sc.fleet_size : cfg.n)
              << " steps=" << sc.steps << "  gamma_cum=" << res.metrics.gamma_cum
              << "  gamma_avg=" << res.metrics.gamma_avg
              << "  E=" << res.metrics.effective_coverage << "\n";
  } catch (const AuditFailure& e) {
    std::cerr << "audit failure: " << e.what() << "\n";
    return kAuditFailure;
  }
  std::cout << "metrics written to " << a.out_dir << "/metrics.json\n";
  return kOk;
}

struct SweepArgs {
  std::string config_path;
  std::string checkpoint;
  bool scripted = false;
  std::string scenario = "line1000";
  std::string n_spec = "2,4,6,8,10";  // comma list or a..b range
  int seeds = 1;
  std::string out_dir;
};

inline std::vector<int> parse_n_spec(const std::string& spec) {
  std::vector<int> out;
  const auto dots = spec.find("..");
  if (dots != std::string::npos) {
    const int lo = std::stoi(spec.substr(0, dots));
    const int hi = std::stoi(spec.substr(dots + 2));
    for (int v = lo; v <= hi; ++v) out.push_back(v);
    return out;
  }
  size_t pos = 0;
  while (pos < spec.size()) {
    const size_t comma = spec.find(',', pos);
    out.push_back(std::stoi(spec.substr(pos, comma - pos)));
    pos = comma == std::string::npos ? spec.size() : comma + 1;
  }
  return out;
}

inline int cmd_sweep(const SweepArgs& a) {
  detail::Stopwatch watch;
  MissionConfig cfg;
  Scenario sc;
  std::vector<int> n_list;
  try {
    cfg = MissionConfig::load(a.config_path);
    sc = load_scenario(a.scenario);
    n_list = parse_n_spec(a.n_spec);
    if (n_list.empty() || a.seeds < 1) throw ConfigError("empty sweep");
    if (a.scripted == !a.checkpoint.empty())
      throw ConfigError("need exactly one of --checkpoint or --scripted-policy");
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }

  PolicyFactory factory;
  if (a.scripted) {
    factory = [](uint64_t run_seed, const MissionConfig&) -> Policy {
      return ScriptedPolicy(run_seed);
    };
  } else {
    std::shared_ptr<ActorCritic> proto;
    try {
      proto = std::make_shared<ActorCritic>(ActorCritic::load(a.checkpoint, cfg));
    } catch (const CheckpointError& e) {
      std::cerr << "checkpoint error: " << e.what() << "\n";
      return kCheckpointError;
    }
    factory = [proto](uint64_t, const MissionConfig&) -> Policy {
      // per-run copy: forward passes use mutable workspaces
      auto ac = std::make_shared<ActorCritic>(*proto);
      return detail::actor_policy(ac);
    };
  }

  std::filesystem::create_directories(a.out_dir);
  try {
    const auto rows = sweep_fleet(factory, cfg, sc, n_list, a.seeds, env_threads());

    std::ofstream f(a.out_dir + "/sweep.csv");
    f.precision(17);
    f << "n,seed,gamma_cum,gamma_avg,effective_coverage\n";
    for (const auto& r : rows)
      f << r.n << "," << r.seed << "," << r.gamma_cum << "," << r.gamma_avg << ","
        << r.effective_coverage << "\n";

    std::ofstream g(a.out_dir + "/sweep_summary.csv");
    g.precision(17);
    g << "n,gamma_cum_min,gamma_cum_median,gamma_cum_max,gamma_avg_min,gamma_avg_median,"
         "gamma_avg_max\n";
    for (int n : n_list) {
      std::vector<double> gc, ga;
      for (const auto& r : rows)
        if (r.n == n) {
          gc.push_back(r.gamma_cum);
          ga.push_back(r.gamma_avg);
        }
      std::sort(gc.begin(), gc.end());
      std::sort(ga.begin(), ga.end());
      const auto med = [](const std::vector<double>& v) {
        const size_t k = v.size();
        return k % 2 ? v[k / 2] : 0.5 * (v[k / 2 - 1] + v[k / 2]);
      };
      g << n << "," << gc.front() << "," << med(gc) << "," << gc.back() << "," << ga.front()
        << "," << med(ga) << "," << ga.back() << "\n";
    }

    detail::write_text(a.out_dir + "/config.json", cfg.to_json().dump(2) + "\n");
    RunManifest m;
    m.command = "sweep";
    m.args = {{"config", a.config_path}, {"scenario", a.scenario}, {"n", a.n_spec},
              {"seeds", a.seeds},        {"scripted", a.scripted}, {"checkpoint", a.checkpoint},
              {"out", a.out_dir}};
    m.config = cfg.to_json();
    m.config_digest = json_digest(m.config);
    m.seed = cfg.seed;
    if (!a.checkpoint.empty()) m.inputs.push_back(a.checkpoint);
    m.outputs = {"sweep.csv", "sweep_summary.csv", "config.json"};
    m.wall_clock_s = watch.seconds();
    m.write(a.out_dir + "/manifest.json");
  } catch (const AuditFailure& e) {
    std::cerr << "audit failure: " << e.what() << "\n";
    return kAuditFailure;
  }
  return kOk;
}

// Offline verification of a serialized allocation instance.
inline AllocationInstance instance_from_json(const nlohmann::json& j) {
  AllocationInstance inst;
  inst.drone_ids = j.value("drones", std::vector<int>{});
  for (const auto& s : j.value("slots", nlohmann::json::array()))
    inst.slot_ids.push_back(s.get<int64_t>());
  inst.rows = static_cast<int>(inst.drone_ids.size());
  inst.cols = static_cast<int>(inst.slot_ids.size());
  inst.cost.assign(static_cast<size_t>(inst.rows) * inst.cols, 0.0);
  inst.forbidden.assign(static_cast<size_t>(inst.rows) * inst.cols, 0);
  const auto& cost = j.at("cost");
  for (int i = 0; i < inst.rows; ++i)
    for (int k = 0; k < inst.cols; ++k) inst.at(i, k) = cost.at(i).at(k).get<double>();
  if (j.contains("forbidden"))
    for (int i = 0; i < inst.rows; ++i)
      for (int k = 0; k < inst.cols; ++k)
        if (j.at("forbidden").at(i).at(k).get<bool>()) inst.ban(i, k);
  return inst;
}

inline nlohmann::json assignment_to_json(const AllocationInstance& inst, const Assignment& a) {
  nlohmann::json pairs = nlohmann::json::array();
  for (int i = 0; i < inst.rows; ++i)
    pairs.push_back({{"drone", inst.drone_ids[static_cast<size_t>(i)]},
                     {"slot", inst.slot_ids[static_cast<size_t>(a.slot_of_drone[static_cast<size_t>(i)])]}});
  return nlohmann::json{{"assignment", pairs}, {"cost", a.total_cost}};
}

inline int cmd_schedule_check(const std::string& instance_path) {
  nlohmann::json j;
  {
    std::ifstream f(instance_path);
    if (!f) {
      std::cerr << "config error: instance file not found: " << instance_path << "\n";
      return kConfigError;
    }
    try {
      f >> j;
    } catch (const std::exception& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return kConfigError;
    }
  }
  AllocationInstance inst;
  try {
    inst = instance_from_json(j);
  } catch (const std::exception& e) {
    std::cerr << "config error: malformed instance: " << e.what() << "\n";
    return kConfigError;
  }

  if (inst.empty()) {
    std::cout << "empty instance: nothing to assign\n";
    return kOk;
  }
  const auto sol = solve(inst);
  if (!sol) {
    // name the constraint that cannot be met
    for (int i = 0; i < inst.rows; ++i) {
      bool any = false;
      for (int k = 0; k < inst.cols; ++k) any = any || !inst.banned(i, k);
      if (!any) {
        std::cerr << "infeasible: drone " << inst.drone_ids[static_cast<size_t>(i)]
                  << " has no admissible slot (every edge fails the reachability deadline)\n";
        return kInfeasible;
      }
    }
    std::cerr << "infeasible: more drones than admissible slots (one-slot-per-drone cannot hold)\n";
    return kInfeasible;
  }

  std::cout << assignment_to_json(inst, *sol).dump(2) << "\n";
  if (inst.rows <= 6 && inst.cols <= 10) {
    const auto oracle = brute_force_solve(inst);
    if (oracle && oracle->total_cost == sol->total_cost &&
        oracle->slot_of_drone == sol->slot_of_drone)
      std::cout << "oracle agrees (exhaustive enumeration)\n";
    else
      std::cout << "ORACLE MISMATCH\n";
  }
  return kOk;
}

// Re-execute a finished run from its manifest into a fresh directory.
// Supports the reproducibility check: outputs must come back byte-identical.
inline int rerun_from_manifest(const std::string& manifest_path, const std::string& out_dir) {
  const RunManifest m = RunManifest::load(manifest_path);
  if (m.command == "simulate") {
    SimulateArgs a;
    a.config_path = m.args.at("config").get<std::string>();
    a.scenario = m.args.at("scenario").get<std::string>();
    a.steps = m.args.at("steps").get<int>();
    a.fleet = m.args.at("n").get<int>();
    a.scripted = m.args.at("scripted").get<bool>();
    a.checkpoint = m.args.at("checkpoint").get<std::string>();
    a.value_map = m.args.at("value_map").get<std::string>();
    a.snapshot_every = m.args.at("snapshot_every").get<int>();
    a.out_dir = out_dir;
    return cmd_simulate(a);
  }
  if (m.command == "sweep") {
    SweepArgs a;
    a.config_path = m.args.at("config").get<std::string>();
    a.scenario = m.args.at("scenario").get<std::string>();
    a.n_spec = m.args.at("n").get<std::string>();
    a.seeds = m.args.at("seeds").get<int>();
    a.scripted = m.args.at("scripted").get<bool>();
    a.checkpoint = m.args.at("checkpoint").get<std::string>();
    a.out_dir = out_dir;
    return cmd_sweep(a);
  }
  if (m.command == "train") {
    TrainArgs a;
    a.config_path = m.args.at("config").get<std::string>();
    if (m.args.contains("checkpoint"))
      a.resume_checkpoint = m.args.at("checkpoint").get<std::string>();
    a.out_dir = out_dir;
    return cmd_train(a);
  }
  std::cerr << "config error: manifest command not recognized: " << m.command << "\n";
  return kConfigError;
}

}  // namespace sc2::cli
