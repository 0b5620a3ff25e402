#pragma once

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sc2/grid.hpp"
#include "sc2/info_map.hpp"
#include "sc2/rover_path.hpp"
#include "sc2/vec2.hpp"

namespace sc2 {

// A runnable mission description: rover track, duration, optional fleet-size
// override and optional terrain-value prior.
struct Scenario {
  std::string name = "custom";
  std::vector<Vec2> waypoints;
  int steps = 0;
  int fleet_size = 0;  // 0: use the config's n
  ValueField value;
  bool has_value = false;
  nlohmann::json value_spec;  // how `value` was specified, for provenance

  RoverPath rover_path() const { return RoverPath(waypoints); }

  nlohmann::json to_json() const {
    nlohmann::json w = nlohmann::json::array();
    for (const Vec2& p : waypoints) w.push_back({p.x, p.y});
    nlohmann::json j{{"name", name}, {"waypoints", w}, {"steps", steps}};
    if (fleet_size > 0) j["n"] = fleet_size;
    if (!value_spec.is_null())
      for (auto it = value_spec.begin(); it != value_spec.end(); ++it) j[it.key()] = it.value();
    return j;
  }
};

namespace scenarios {

// Loop around a 200 m crater, then 500 m straight on. The circle starts and
// ends at the origin heading +x; a 2-degree polyline keeps chord error small.
inline Scenario fig4() {
  Scenario s;
  s.name = "fig4";
  s.steps = 3600;
  const int segs = 180;
  const double r = 200.0;
  for (int i = 0; i <= segs; ++i) {
    const double th = 2.0 * M_PI * i / segs;
    s.waypoints.push_back({r * std::sin(th), r * (1.0 - std::cos(th))});
  }
  s.waypoints.push_back({500.0, 0.0});
  return s;
}

// 1000 s straight line at the reference rover speed.
inline Scenario line1000() {
  Scenario s;
  s.name = "line1000";
  s.steps = 1000;
  s.waypoints = {{0.0, 0.0}, {500.0, 0.0}};
  return s;
}

// Straight line past a high-value crater near the edge of the feasible
// swath: value 1 inside the crater disc, 0.2 elsewhere.
inline Vec2 crater_center() { return {250.0, 160.0}; }
inline double crater_radius() { return 60.0; }

inline Scenario crater_value() {
  Scenario s = line1000();
  s.name = "crater-value";
  s.value = ValueField::disc(crater_center(), crater_radius(), 1.0, 0.2);
  s.has_value = true;
  s.value_spec = {{"value_disc",
                   {{"cx", crater_center().x},
                    {"cy", crater_center().y},
                    {"radius", crater_radius()},
                    {"inside", 1.0},
                    {"outside", 0.2}}}};
  return s;
}

}  // namespace scenarios

inline Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario s;
  if (j.contains("name")) s.name = j.at("name").get<std::string>();
  if (!j.contains("waypoints") || !j.at("waypoints").is_array() || j.at("waypoints").empty())
    throw std::runtime_error("scenario needs a non-empty waypoints array");
  for (const auto& w : j.at("waypoints")) s.waypoints.push_back({w.at(0).get<double>(), w.at(1).get<double>()});
  s.steps = j.value("steps", 0);
  s.fleet_size = j.value("n", 0);
  if (j.contains("value_disc")) {
    const auto& d = j.at("value_disc");
    s.value = ValueField::disc({d.at("cx").get<double>(), d.at("cy").get<double>()},
                               d.at("radius").get<double>(), d.at("inside").get<double>(),
                               d.at("outside").get<double>());
    s.has_value = true;
    s.value_spec = {{"value_disc", j.at("value_disc")}};
  } else if (j.contains("value_map")) {
    s.value = ValueField::from_grid(read_grid_csv(j.at("value_map").get<std::string>()));
    s.has_value = true;
    s.value_spec = {{"value_map", j.at("value_map")}};
  }
  return s;
}

// Preset name or a JSON file path.
inline Scenario load_scenario(const std::string& name_or_path) {
  if (name_or_path == "fig4") return scenarios::fig4();
  if (name_or_path == "line1000") return scenarios::line1000();
  if (name_or_path == "crater-value") return scenarios::crater_value();
  std::ifstream f(name_or_path);
  if (!f) throw std::runtime_error("unknown scenario (not a preset, file not found): " + name_or_path);
  nlohmann::json j;
  f >> j;
  return scenario_from_json(j);
}

}  // namespace sc2
