#include <doctest.h>

#include <cmath>

#include "sc2/config.hpp"
#include "sc2/drone.hpp"
#include "sc2/rng.hpp"
#include "sc2/rover_path.hpp"
#include "sc2/slots.hpp"

using namespace sc2;

namespace {
MissionConfig table_config() {
  MissionConfig cfg;  // defaults are the reference parameters
  return cfg;
}
}  // namespace

TEST_CASE("config validation rejects inconsistent parameters") {
  MissionConfig cfg = table_config();
  CHECK_NOTHROW(cfg.validate());

  cfg.v_r = 6.0;  // rover faster than drones
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = table_config();
  cfg.r_s = 300.0;  // sensing beyond comms
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = table_config();
  cfg.n = 60;  // more drones than slot candidates
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = table_config();
  cfg.r_o = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("config json round trip and unknown key rejection") {
  MissionConfig cfg = table_config();
  const auto j = cfg.to_json();
  const MissionConfig back = MissionConfig::from_json(j);
  CHECK(back.v_a == cfg.v_a);
  CHECK(back.n_tau() == cfg.n_tau());

  auto bad = j;
  bad["v_max"] = 3.0;
  CHECK_THROWS_AS(MissionConfig::from_json(bad), ConfigError);
}

TEST_CASE("rover position on a straight path") {
  MissionConfig cfg = table_config();
  const RoverPath path = straight_path({0, 0}, {1, 0}, 600.0);

  SUBCASE("constant speed line") {
    const Vec2 p = rover_position(path, 10, cfg);  // 0.5 m/s * 10 s
    CHECK(p.x == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(p.y == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("t = 0 is the first waypoint") {
    const Vec2 p = rover_position(path, 0, cfg);
    CHECK(p.x == 0.0);
    CHECK(p.y == 0.0);
  }
  SUBCASE("clamped at the end of the path") {
    const Vec2 p = rover_position(path, 100000, cfg);
    CHECK(p.x == doctest::Approx(600.0));
    CHECK(p.y == doctest::Approx(0.0));
  }
  SUBCASE("arc coverage after T steps") {
    for (int T : {0, 7, 1200, 5000}) {
      const double s = path.arc_length_at_step(T, cfg);
      CHECK(s == doctest::Approx(std::min(cfg.v_r * cfg.dt * T, path.total_length())));
    }
  }
}

TEST_CASE("rover position at the circle-line junction") {
  // circle of radius 200 sampled as a polyline, then a 500 m straight leg;
  // the oracle is the accumulated chord length of the circle part
  MissionConfig cfg = table_config();
  const int segs = 180;
  const double r = 200.0;
  std::vector<Vec2> wps;
  for (int i = 0; i <= segs; ++i) {
    const double th = 2.0 * M_PI * i / segs;
    wps.push_back({r * std::sin(th), r * (1.0 - std::cos(th))});
  }
  wps.push_back({500.0, 0.0});
  const RoverPath path(wps);

  double circle_arc = 0.0;  // independent arc-length integration of the polyline
  for (int i = 0; i < segs; ++i) circle_arc += distance(wps[i], wps[i + 1]);

  const Vec2 junction = path.position_at(circle_arc);
  CHECK(junction.x == doctest::Approx(wps[segs].x).epsilon(1e-9));
  CHECK(junction.y == doctest::Approx(wps[segs].y).epsilon(1e-9));

  // the polyline arc is slightly below 2*pi*r (chords), within 0.1%
  CHECK(circle_arc == doctest::Approx(2.0 * M_PI * r).epsilon(1e-3));
}

TEST_CASE("slot candidate window") {
  MissionConfig cfg = table_config();

  SUBCASE("reference parameters give 40 candidates") {
    // min(floor(200/5), floor(100*5/5))
    CHECK(cfg.n_tau() == 40);
  }
  SUBCASE("slots ahead of a rover at the origin") {
    const RoverPath path = straight_path({0, 0}, {1, 0}, 600.0);
    const SlotSet s = slot_positions(path, 0, cfg);
    REQUIRE(s.count() == 40);
    CHECK(s.pos[0].x == doctest::Approx(5.0));
    CHECK(s.pos[0].y == doctest::Approx(0.0));
    CHECK(s.pos[1].x == doctest::Approx(10.0));
  }
  SUBCASE("slots past the end clamp to the final waypoint") {
    const RoverPath path = straight_path({0, 0}, {1, 0}, 12.0);
    const SlotSet s = slot_positions(path, 0, cfg);
    CHECK(s.pos[1].x == doctest::Approx(10.0));
    for (int k = 2; k < s.count(); ++k) CHECK(s.pos[static_cast<size_t>(k)].x == doctest::Approx(12.0));
  }
  SUBCASE("recomputation is bit identical") {
    const RoverPath path = straight_path({3.1, -2.7}, {0.6, 0.8}, 900.0);
    const SlotSet a = slot_positions(path, 137, cfg);
    const SlotSet b = slot_positions(path, 137, cfg);
    REQUIRE(a.count() == b.count());
    for (int k = 0; k < a.count(); ++k) {
      CHECK(a.pos[static_cast<size_t>(k)].x == b.pos[static_cast<size_t>(k)].x);
      CHECK(a.pos[static_cast<size_t>(k)].y == b.pos[static_cast<size_t>(k)].y);
    }
  }
  SUBCASE("rover deadline is infinite only at the path end") {
    const RoverPath path = straight_path({0, 0}, {1, 0}, 600.0);
    const SlotSet s = slot_positions(path, 0, cfg);
    CHECK(rover_deadline(path, s.index[0], s.s_rover, cfg) == doctest::Approx(10.0));
    CHECK(rover_deadline(path, s.index[1], s.s_rover, cfg) == doctest::Approx(20.0));
    CHECK(std::isinf(rover_deadline(path, 120, s.s_rover, cfg)));  // arc 600 = path end
  }
}

TEST_CASE("kinematics") {
  MissionConfig cfg = table_config();
  DroneState d;
  d.mode = Mode::Explore;

  SUBCASE("zero heading moves +x") {
    d.p = {0, 0};
    const DroneState n = step_kinematics(d, 0.0, cfg);
    CHECK(n.p.x == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(n.p.y == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(n.t_i == 1);
  }
  SUBCASE("psi = 0.5 moves +y") {
    d.p = {0, 0};
    const DroneState n = step_kinematics(d, 0.5, cfg);
    CHECK(n.p.x == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(n.p.y == doctest::Approx(5.0).epsilon(1e-12));
  }
  SUBCASE("psi = -1 moves -x") {
    d.p = {3, 4};
    const DroneState n = step_kinematics(d, -1.0, cfg);
    CHECK(n.p.x == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(n.p.y == doctest::Approx(4.0).epsilon(1e-12));
  }
  SUBCASE("charging drones hold position and endurance") {
    d.p = {7, 7};
    d.mode = Mode::Charge;
    d.t_i = 42;
    const DroneState n = step_kinematics(d, 0.3, cfg);
    CHECK(n.p.x == 7.0);
    CHECK(n.t_i == 42);
  }
  SUBCASE("displacement magnitude is exactly v_a dt for any heading") {
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
      d.p = {rng.uniform(-100, 100), rng.uniform(-100, 100)};
      const double psi = rng.uniform(-1.0, 1.0);
      const DroneState n = step_kinematics(d, psi, cfg);
      CHECK(distance(n.p, d.p) == doctest::Approx(cfg.v_a * cfg.dt).epsilon(1e-12));
    }
  }
}

TEST_CASE("heading wrap") {
  CHECK(wrap_heading(1.2) == doctest::Approx(-0.8).epsilon(1e-12));
  CHECK(wrap_heading(-1.0) == doctest::Approx(-1.0));
  CHECK(wrap_heading(1.0) == doctest::Approx(-1.0));
  CHECK(wrap_heading(0.25) == doctest::Approx(0.25));
  CHECK(wrap_heading(-2.75) == doctest::Approx(-0.75).epsilon(1e-12));
}
