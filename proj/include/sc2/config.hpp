#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace sc2 {

// Raised for any malformed or inconsistent configuration. The message always
// names the offending field so the CLI can report it verbatim.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Every physical and learning parameter of a mission. Defaults follow the
// reference experimental setup; all values are overridable from a flat JSON
// document with the same snake_case keys.
struct MissionConfig {
  // Drone / rover
  double v_a = 5.0;    // drone speed, m/s
  double v_r = 0.5;    // rover speed, m/s
  double r_s = 50.0;   // sensing range, m
  double r_c = 200.0;  // communication range, m
  double r_o = 5.0;    // safety radius, m
  int t_a = 100;       // endurance, steps
  double d_tau = 5.0;  // charging slot spacing, m
  double m_a = 1.0;    // peak sensing value
  double eta = 50.0;   // decay factor, steps (per-step decay is m_a/eta)
  double cell = 5.0;   // grid resolution, m/cell
  double dt = 1.0;     // step duration, s
  double eps = -1.0;   // arrival threshold, m; <0 means "derive v_a*dt/2"
  int n = 10;          // fleet size
  uint64_t seed = 1;

  // Learner
  double alpha = 1e-4;        // actor learning rate
  double beta = 1e-3;         // critic learning rate
  double gamma = 0.95;        // discount
  double omega_c = 20.0;      // coverage reward weight
  double omega_e = 1.0;       // exploration reward weight
  double sigma_start = 0.5;   // exploration noise, annealed linearly
  double sigma_end = 0.05;
  int n_b = 64;               // training batch size
  int replay_capacity = 50000;
  int episodes = 1000;
  int obs_size = 21;          // local observation is obs_size x obs_size x 2
  int hidden = 128;           // dense layer width
  int n_min = 2;              // training fleet size is drawn from [n_min, n_max]
  int n_max = 10;

  // Engine
  int return_margin = 2;           // steps of slack in the return trigger
  bool degrade_to_nearest = false; // emergency routing instead of fatal infeasibility

  double arrival_eps() const { return eps > 0 ? eps : v_a * dt / 2.0; }

  // Number of charging slot candidates ahead of the rover.
  int n_tau() const {
    const double by_comm = std::floor(r_c / d_tau);
    const double by_range = std::floor(t_a * v_a * dt / d_tau);
    return static_cast<int>(std::min(by_comm, by_range));
  }

  // Time for the rover to advance one slot spacing, seconds.
  double t_tau() const { return d_tau / v_r; }

  double map_side() const { return 2.0 * (r_s + r_c); }
  int map_cells() const { return static_cast<int>(std::ceil(map_side() / cell)); }

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0)) throw ConfigError(std::string(name) + " must be > 0");
    };
    positive(v_a, "v_a");
    positive(v_r, "v_r");
    positive(r_s, "r_s");
    positive(r_c, "r_c");
    positive(r_o, "r_o");
    positive(d_tau, "d_tau");
    positive(m_a, "m_a");
    positive(eta, "eta");
    positive(cell, "cell");
    positive(dt, "dt");
    if (t_a <= 0) throw ConfigError("t_a must be > 0");
    if (n <= 0) throw ConfigError("n must be > 0");
    if (!(v_a > v_r)) throw ConfigError("v_a must exceed v_r");
    if (!(r_s < r_c)) throw ConfigError("r_s must be < r_c");
    if (!(r_o < r_s)) throw ConfigError("r_o must be < r_s");
    if (eps > 0 && eps >= r_o * 10) throw ConfigError("eps unreasonably large");
    if (n_tau() <= n)
      throw ConfigError("n_tau = " + std::to_string(n_tau()) +
                        " must exceed fleet size n = " + std::to_string(n));
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must be in (0,1)");
    if (n_b <= 0) throw ConfigError("n_b must be > 0");
    if (replay_capacity < n_b) throw ConfigError("replay_capacity must be >= n_b");
    if (episodes < 0) throw ConfigError("episodes must be >= 0");
    if (obs_size < 3) throw ConfigError("obs_size must be >= 3");
    if (hidden < 1) throw ConfigError("hidden must be >= 1");
    if (n_min < 1 || n_max < n_min) throw ConfigError("need 1 <= n_min <= n_max");
    if (return_margin < 2) throw ConfigError("return_margin must be >= 2");
    if (sigma_start < sigma_end || sigma_end < 0)
      throw ConfigError("need sigma_start >= sigma_end >= 0");
  }

  static MissionConfig from_json(const nlohmann::json& j);
  static MissionConfig load(const std::string& path);
  nlohmann::json to_json() const;
};

inline MissionConfig MissionConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  MissionConfig c;
  auto num = [&](const char* key, auto& field) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if (!v.is_number()) throw ConfigError(std::string(key) + " must be numeric");
    field = v.get<std::remove_reference_t<decltype(field)>>();
  };
  num("v_a", c.v_a);
  num("v_r", c.v_r);
  num("r_s", c.r_s);
  num("r_c", c.r_c);
  num("r_o", c.r_o);
  num("t_a", c.t_a);
  num("d_tau", c.d_tau);
  num("m_a", c.m_a);
  num("eta", c.eta);
  num("cell", c.cell);
  num("dt", c.dt);
  num("eps", c.eps);
  num("n", c.n);
  num("seed", c.seed);
  num("alpha", c.alpha);
  num("beta", c.beta);
  num("gamma", c.gamma);
  num("omega_c", c.omega_c);
  num("omega_e", c.omega_e);
  num("sigma_start", c.sigma_start);
  num("sigma_end", c.sigma_end);
  num("n_b", c.n_b);
  num("replay_capacity", c.replay_capacity);
  num("episodes", c.episodes);
  num("obs_size", c.obs_size);
  num("hidden", c.hidden);
  num("n_min", c.n_min);
  num("n_max", c.n_max);
  num("return_margin", c.return_margin);
  if (j.contains("degrade_to_nearest")) {
    if (!j.at("degrade_to_nearest").is_boolean())
      throw ConfigError("degrade_to_nearest must be boolean");
    c.degrade_to_nearest = j.at("degrade_to_nearest").get<bool>();
  }

  static const char* known[] = {
      "v_a", "v_r", "r_s", "r_c", "r_o", "t_a", "d_tau", "m_a", "eta", "cell",
      "dt", "eps", "n", "seed", "alpha", "beta", "gamma", "omega_c", "omega_e",
      "sigma_start", "sigma_end", "n_b", "replay_capacity", "episodes",
      "obs_size", "hidden", "n_min", "n_max", "return_margin", "degrade_to_nearest"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw ConfigError("unknown config key: " + it.key());
  }

  c.validate();
  return c;
}

inline MissionConfig MissionConfig::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config file not found: " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const std::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return from_json(j);
}

inline nlohmann::json MissionConfig::to_json() const {
  return nlohmann::json{{"v_a", v_a},
                        {"v_r", v_r},
                        {"r_s", r_s},
                        {"r_c", r_c},
                        {"r_o", r_o},
                        {"t_a", t_a},
                        {"d_tau", d_tau},
                        {"m_a", m_a},
                        {"eta", eta},
                        {"cell", cell},
                        {"dt", dt},
                        {"eps", eps},
                        {"n", n},
                        {"seed", seed},
                        {"alpha", alpha},
                        {"beta", beta},
                        {"gamma", gamma},
                        {"omega_c", omega_c},
                        {"omega_e", omega_e},
                        {"sigma_start", sigma_start},
                        {"sigma_end", sigma_end},
                        {"n_b", n_b},
                        {"replay_capacity", replay_capacity},
                        {"episodes", episodes},
                        {"obs_size", obs_size},
                        {"hidden", hidden},
                        {"n_min", n_min},
                        {"n_max", n_max},
                        {"return_margin", return_margin},
                        {"degrade_to_nearest", degrade_to_nearest}};
}

}  // namespace sc2
