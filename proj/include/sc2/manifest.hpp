#pragma once

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace sc2 {

inline constexpr const char* kCodeVersion = "0.1.0";

// Stable digest of a JSON document: nlohmann objects iterate in key order, so
// the dump is canonical and the digest does not depend on field ordering.
inline std::string json_digest(const nlohmann::json& j) {
  const std::string s = j.dump();
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// Every artifact directory gets exactly one of these. It carries enough to
// re-run the command; the wall clock lives here so the metrics JSON stays
// byte-stable across reruns.
struct RunManifest {
  std::string command;
  nlohmann::json args;  // resolved command arguments
  nlohmann::json config;
  std::string config_digest;
  uint64_t seed = 0;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  double wall_clock_s = 0.0;

  nlohmann::json to_json() const {
    return nlohmann::json{{"command", command},
                          {"args", args},
                          {"config", config},
                          {"config_digest", config_digest},
                          {"seed", seed},
                          {"inputs", inputs},
                          {"outputs", outputs},
                          {"code_version", kCodeVersion},
                          {"wall_clock_s", wall_clock_s}};
  }

  void write(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for write: " + path);
    f << to_json().dump(2) << "\n";
  }

  static RunManifest load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("manifest not found: " + path);
    nlohmann::json j;
    f >> j;
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.args = j.at("args");
    m.config = j.at("config");
    m.config_digest = j.at("config_digest").get<std::string>();
    m.seed = j.at("seed").get<uint64_t>();
    m.inputs = j.at("inputs").get<std::vector<std::string>>();
    m.outputs = j.at("outputs").get<std::vector<std::string>>();
    return m;
  }
};

}  // namespace sc2
