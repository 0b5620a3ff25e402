#pragma once

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sc2/config.hpp"
#include "sc2/drone.hpp"
#include "sc2/mlp.hpp"
#include "sc2/replay.hpp"
#include "sc2/rng.hpp"

namespace sc2 {

struct CheckpointError : std::runtime_error {
  explicit CheckpointError(const std::string& m) : std::runtime_error(m) {}
};

struct CurvePoint {
  int episode = 0;
  double mean_reward = 0.0;
  double sigma = 0.0;
};

inline void write_curve_csv(const std::vector<CurvePoint>& curve, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  f.precision(17);
  f << "episode,mean_reward,sigma\n";
  for (const auto& c : curve) f << c.episode << "," << c.mean_reward << "," << c.sigma << "\n";
}

// The shared-policy continuous-heading learner. One actor and one critic are
// trained from the pooled experience of the whole fleet; execution is fully
// decentralized (the actor sees one drone's local observation only).
//
// Update rules per sampled batch, with TD errors computed against the
// pre-update critic:
//   delta_k = r_k + gamma * V(s'_k) - V(s_k)
//   critic: one Adam step (rate beta) on sum_k delta_k * dV(s_k)/dtheta
//   actor:  one Adam step (rate alpha) on
//           sum_{delta_k > 0} (psi_k - Act(s_k)) * dAct(s_k)/dtheta,
//           skipped entirely when no tuple passes the gate.
// The critic net predicts value / kValueScale; the scale keeps the head in a
// range the bounded Adam steps can reach while TD errors stay in raw reward
// units.
class ActorCritic {
 public:
  static constexpr double kValueScale = 200.0;

  ActorCritic() = default;

  ActorCritic(const MissionConfig& cfg, Rng& rng)
      : obs_size_(cfg.obs_size),
        actor_(2 * cfg.obs_size * cfg.obs_size, cfg.hidden, true),
        critic_(2 * cfg.obs_size * cfg.obs_size, cfg.hidden, false),
        alpha_(cfg.alpha),
        beta_(cfg.beta),
        gamma_(cfg.gamma) {
    actor_.init(rng);
    critic_.init(rng);
    opt_actor_ = Adam(alpha_, actor_.param_count());
    opt_critic_ = Adam(beta_, critic_.param_count());
  }

  int obs_size() const { return obs_size_; }
  int episode() const { return episode_; }
  void set_episode(int e) { episode_ = e; }
  Mlp& actor() { return actor_; }
  Mlp& critic() { return critic_; }
  const Mlp& actor() const { return actor_; }
  const Mlp& critic() const { return critic_; }
  int rejected_updates() const { return rejected_updates_; }

  double sigma(const MissionConfig& cfg) const {
    if (cfg.episodes <= 1) return cfg.sigma_start;
    const double f = std::min(1.0, static_cast<double>(episode_) / (cfg.episodes - 1));
    return cfg.sigma_start + f * (cfg.sigma_end - cfg.sigma_start);
  }

  // Deterministic policy output; with `explore`, Gaussian noise of the given
  // scale is added and the result wraps around the heading circle (no
  // clipping bias).
  double act(const std::vector<double>& input, bool explore, double noise_sigma, Rng& rng) {
    double psi = actor_.forward(input);
    if (explore) psi = wrap_heading(psi + rng.gaussian(0.0, noise_sigma));
    return psi;
  }

  double value(const std::vector<double>& input) {
    return kValueScale * critic_.forward(input);
  }

  double td_error(const Experience& e) {
    const double v2 = e.terminal ? 0.0 : value(e.s2);
    const double v1 = value(e.s);
    return e.r + gamma_ * v2 - v1;
  }

  // One batch update. Returns false when a non-finite gradient was detected;
  // the batch is then dropped and training continues.
  bool update(const std::vector<Experience>& batch) {
    grad_critic_.assign(critic_.param_count(), 0.0);
    grad_actor_.assign(actor_.param_count(), 0.0);
    bool any_positive = false;

    for (const Experience& e : batch) {
      const double v2 = e.terminal ? 0.0 : value(e.s2);
      const double v1 = value(e.s);  // leaves activations for s in place
      const double delta = e.r + gamma_ * v2 - v1;
      critic_.accumulate_grad_into(e.s, delta, grad_critic_);
      if (delta > 0.0) {
        const double a = actor_.forward(e.s);
        actor_.accumulate_grad_into(e.s, e.psi - a, grad_actor_);
        any_positive = true;
      }
    }

    if (!finite(grad_critic_) || !finite(grad_actor_)) {
      ++rejected_updates_;
      return false;
    }
    opt_critic_.step(critic_.params(), grad_critic_);
    if (any_positive) opt_actor_.step(actor_.params(), grad_actor_);
    return true;
  }

  nlohmann::json to_json() const {
    return nlohmann::json{{"format_version", 1},
                          {"obs_size", obs_size_},
                          {"episode", episode_},
                          {"actor", actor_.to_json()},
                          {"critic", critic_.to_json()},
                          {"opt_actor", opt_actor_.to_json()},
                          {"opt_critic", opt_critic_.to_json()}};
  }

  static ActorCritic from_json(const nlohmann::json& j, const MissionConfig& cfg) {
    if (!j.contains("format_version") || j.at("format_version").get<int>() != 1)
      throw CheckpointError("unsupported checkpoint format");
    ActorCritic ac;
    ac.obs_size_ = j.at("obs_size").get<int>();
    ac.episode_ = j.at("episode").get<int>();
    ac.actor_ = Mlp::from_json(j.at("actor"));
    ac.critic_ = Mlp::from_json(j.at("critic"));
    ac.opt_actor_ = Adam::from_json(j.at("opt_actor"));
    ac.opt_critic_ = Adam::from_json(j.at("opt_critic"));
    ac.alpha_ = cfg.alpha;
    ac.beta_ = cfg.beta;
    ac.gamma_ = cfg.gamma;
    if (ac.obs_size_ != cfg.obs_size)
      throw CheckpointError("checkpoint obs_size " + std::to_string(ac.obs_size_) +
                            " does not match config obs_size " + std::to_string(cfg.obs_size));
    if (ac.actor_.hidden_size() != cfg.hidden)
      throw CheckpointError("checkpoint hidden size " +
                            std::to_string(ac.actor_.hidden_size()) +
                            " does not match config hidden " + std::to_string(cfg.hidden));
    return ac;
  }

  void save(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for write: " + path);
    f << to_json().dump();
  }

  static ActorCritic load(const std::string& path, const MissionConfig& cfg) {
    std::ifstream f(path);
    if (!f) throw CheckpointError("checkpoint file not found: " + path);
    nlohmann::json j;
    try {
      f >> j;
    } catch (const std::exception& e) {
      throw CheckpointError("checkpoint parse error in " + path + ": " + e.what());
    }
    return from_json(j, cfg);
  }

 private:
  static bool finite(const std::vector<double>& v) {
    for (double x : v)
      if (!std::isfinite(x)) return false;
    return true;
  }

  int obs_size_ = 0;
  Mlp actor_;
  Mlp critic_;
  double alpha_ = 1e-4;
  double beta_ = 1e-3;
  double gamma_ = 0.95;
  int episode_ = 0;
  int rejected_updates_ = 0;
  Adam opt_actor_, opt_critic_;
  std::vector<double> grad_critic_, grad_actor_;
};

// Training driver. The environment contract:
//   void reset(Rng&)                      start a fresh randomized episode
//   int fleet_size() const
//   void observe(int i, std::vector<double>& out)
//   StepOutcome step(const std::vector<double>& headings)
// with StepOutcome carrying per-drone rewards, per-drone terminal flags and
// an episode_done flag. Episodes run at most t_a steps.
struct StepOutcome {
  std::vector<double> reward;
  std::vector<uint8_t> terminal;
  bool episode_done = false;
};

template <class Env>
std::vector<CurvePoint> train(ActorCritic& ac, Env& env, const MissionConfig& cfg,
                              Rng& rng) {
  std::vector<CurvePoint> curve;
  ReplayBuffer buffer(static_cast<size_t>(cfg.replay_capacity),
                      static_cast<size_t>(2 * cfg.obs_size * cfg.obs_size));
  std::vector<Experience> batch;
  std::vector<std::vector<double>> obs, obs2;
  std::vector<double> headings;

  const int start = ac.episode();
  for (int ep = start; ep < cfg.episodes; ++ep) {
    ac.set_episode(ep);
    const double sigma = ac.sigma(cfg);
    env.reset(rng);
    const int n = env.fleet_size();
    obs.assign(static_cast<size_t>(n), {});
    obs2.assign(static_cast<size_t>(n), {});
    headings.assign(static_cast<size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) env.observe(i, obs[static_cast<size_t>(i)]);

    double reward_sum = 0.0;
    long reward_count = 0;
    for (int t = 0; t < cfg.t_a; ++t) {
      for (int i = 0; i < n; ++i)
        headings[static_cast<size_t>(i)] = ac.act(obs[static_cast<size_t>(i)], true, sigma, rng);
      const StepOutcome res = env.step(headings);
      for (int i = 0; i < n; ++i) {
        env.observe(i, obs2[static_cast<size_t>(i)]);
        buffer.push(obs[static_cast<size_t>(i)], headings[static_cast<size_t>(i)],
                    res.reward[static_cast<size_t>(i)], obs2[static_cast<size_t>(i)],
                    res.terminal[static_cast<size_t>(i)] != 0);
        reward_sum += res.reward[static_cast<size_t>(i)];
        ++reward_count;
      }
      obs.swap(obs2);
      if (buffer.size() >= static_cast<size_t>(cfg.n_b)) {
        buffer.sample(rng, static_cast<size_t>(cfg.n_b), batch);
        ac.update(batch);
      }
      if (res.episode_done) break;
    }
    curve.push_back({ep, reward_count ? reward_sum / reward_count : 0.0, sigma});
  }
  if (cfg.episodes > start) ac.set_episode(cfg.episodes);
  return curve;
}

}  // namespace sc2
