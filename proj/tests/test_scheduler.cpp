#include <doctest.h>

#include <cmath>
#include <vector>

#include "sc2/config.hpp"
#include "sc2/rng.hpp"
#include "sc2/scheduler.hpp"
#include "sc2/slots.hpp"

using namespace sc2;

namespace {

MissionConfig table_config() { return MissionConfig{}; }

AllocationInstance raw_instance(const std::vector<std::vector<double>>& cost) {
  AllocationInstance inst;
  inst.rows = static_cast<int>(cost.size());
  inst.cols = static_cast<int>(cost.front().size());
  for (int i = 0; i < inst.rows; ++i) inst.drone_ids.push_back(i);
  for (int k = 0; k < inst.cols; ++k) inst.slot_ids.push_back(k);
  inst.cost.assign(static_cast<size_t>(inst.rows) * inst.cols, 0.0);
  inst.forbidden.assign(static_cast<size_t>(inst.rows) * inst.cols, 0);
  for (int i = 0; i < inst.rows; ++i)
    for (int k = 0; k < inst.cols; ++k) inst.at(i, k) = cost[static_cast<size_t>(i)][static_cast<size_t>(k)];
  return inst;
}

DroneState drone_at(double x, double y, Mode mode, int t_i = 0) {
  DroneState d;
  d.p = {x, y};
  d.mode = mode;
  d.t_i = t_i;
  d.departed = true;
  return d;
}

AllocationInstance random_feasible_instance(Rng& rng) {
  const int rows = rng.uniform_int(1, 4);
  const int cols = rng.uniform_int(rows, 8);
  std::vector<std::vector<double>> cost(static_cast<size_t>(rows),
                                        std::vector<double>(static_cast<size_t>(cols)));
  for (auto& row : cost)
    for (double& c : row) c = static_cast<double>(rng.uniform_int(0, 1000));
  AllocationInstance inst = raw_instance(cost);
  // random forbidden edges, then re-open a diagonal so feasibility is ensured
  for (int i = 0; i < rows; ++i)
    for (int k = 0; k < cols; ++k)
      if (rng.uniform() < 0.35) inst.ban(i, k);
  std::vector<int> cols_pool;
  for (int k = 0; k < cols; ++k) cols_pool.push_back(k);
  for (int i = 0; i < rows; ++i) {
    const size_t pick = rng.below(cols_pool.size());
    inst.forbidden[static_cast<size_t>(i) * cols + cols_pool[pick]] = 0;
    cols_pool.erase(cols_pool.begin() + static_cast<long>(pick));
  }
  return inst;
}

}  // namespace

TEST_CASE("build_instance exclusion rules and deadlines") {
  MissionConfig cfg = table_config();
  const RoverPath path = straight_path({0, 0}, {1, 0}, 600.0);
  const SlotSet slots = slot_positions(path, 0, cfg);  // rover at arc 0

  SUBCASE("all drones charging gives an empty instance") {
    std::vector<DroneState> fleet{drone_at(0, 0, Mode::Charge), drone_at(5, 0, Mode::Charge)};
    const AllocationInstance inst = build_instance(fleet, slots, path, cfg);
    CHECK(inst.empty());
  }
  SUBCASE("occupied slots are excluded") {
    std::vector<DroneState> fleet{drone_at(20, 0, Mode::Explore)};
    SlotSet s = slots;
    s.occupant[0] = 7;
    const AllocationInstance inst = build_instance(fleet, s, path, cfg);
    CHECK(inst.cols == slots.count() - 1);
    CHECK(inst.slot_ids.front() == slots.index[1]);
  }
  SUBCASE("rover deadline forbids a slow approach") {
    // drone 100 m from slot 1 (at x=5): travel 20 s, rover arrives in 10 s
    std::vector<DroneState> fleet{drone_at(105, 0, Mode::Explore)};
    const AllocationInstance inst = build_instance(fleet, slots, path, cfg);
    CHECK(inst.at(0, 0) == doctest::Approx(100.0));
    CHECK(inst.banned(0, 0));
    // slot 40 (x=200, rover deadline 400 s, travel 19 s) is admissible
    CHECK_FALSE(inst.banned(0, 39));
  }
  SUBCASE("endurance deadline with the return-trigger margin") {
    // t_i = t_a - 4 leaves (4 - margin) * dt = 2 s of assignable flight
    std::vector<DroneState> fleet{drone_at(20.0, 0, Mode::Explore, cfg.t_a - 4)};
    const AllocationInstance inst = build_instance(fleet, slots, path, cfg);
    CHECK(inst.at(0, 1) == doctest::Approx(10.0));  // slot 2 at x=10: 2 s flight, edge-allowed
    CHECK_FALSE(inst.banned(0, 1));
    CHECK(inst.at(0, 4) == doctest::Approx(5.0));   // slot 5 at x=25: 1 s flight
    CHECK_FALSE(inst.banned(0, 4));
    CHECK(inst.banned(0, 7));                        // slot 8 at x=40: 4 s flight > 2 s budget
    // one step later the same 2 s flight exceeds the 1 s budget
    std::vector<DroneState> tight{drone_at(20.0, 0, Mode::Explore, cfg.t_a - 3)};
    const AllocationInstance inst2 = build_instance(tight, slots, path, cfg);
    CHECK(inst2.banned(0, 1));
  }
}

TEST_CASE("solver on the worked examples") {
  SUBCASE("two drones, two slots") {
    auto inst = raw_instance({{10, 20}, {15, 12}});
    const auto sol = solve(inst);
    REQUIRE(sol);
    CHECK(sol->total_cost == 22.0);
    CHECK(sol->slot_of_drone == std::vector<int>{0, 1});
  }
  SUBCASE("single feasible edge") {
    auto inst = raw_instance({{7.0}});
    const auto sol = solve(inst);
    REQUIRE(sol);
    CHECK(sol->total_cost == 7.0);
  }
  SUBCASE("forbidden edge forces the cross assignment") {
    auto inst = raw_instance({{1, 5}, {2, 9}});
    inst.ban(0, 0);
    const auto sol = solve(inst);
    REQUIRE(sol);
    CHECK(sol->total_cost == 7.0);
    CHECK(sol->slot_of_drone == std::vector<int>{1, 0});
  }
  SUBCASE("infeasible when a drone has no edges") {
    auto inst = raw_instance({{1, 2}, {3, 4}});
    inst.ban(1, 0);
    inst.ban(1, 1);
    CHECK_FALSE(solve(inst));
  }
  SUBCASE("more drones than slots is infeasible") {
    auto inst = raw_instance({{1}, {2}});
    CHECK_FALSE(solve(inst));
  }
  SUBCASE("empty instance solves to an empty assignment") {
    AllocationInstance inst;
    const auto sol = solve(inst);
    REQUIRE(sol);
    CHECK(sol->total_cost == 0.0);
  }
}

TEST_CASE("solver equals exhaustive enumeration on random instances") {
  Rng rng(1234);
  for (int trial = 0; trial < 300; ++trial) {
    const AllocationInstance inst = random_feasible_instance(rng);
    const auto fast = solve(inst);
    const auto slow = brute_force_solve(inst);
    REQUIRE(fast);
    REQUIRE(slow);
    CHECK(fast->total_cost == slow->total_cost);  // integer costs: exact
    CHECK(fast->slot_of_drone == slow->slot_of_drone);
  }
}

TEST_CASE("solver respects the assignment constraints") {
  Rng rng(777);
  for (int trial = 0; trial < 100; ++trial) {
    const AllocationInstance inst = random_feasible_instance(rng);
    const auto sol = solve(inst);
    REQUIRE(sol);
    std::vector<int> used(static_cast<size_t>(inst.cols), 0);
    for (int i = 0; i < inst.rows; ++i) {
      const int k = sol->slot_of_drone[static_cast<size_t>(i)];
      REQUIRE(k >= 0);  // one slot per drone
      REQUIRE(k < inst.cols);
      CHECK_FALSE(inst.banned(i, k));  // deadline respected
      used[static_cast<size_t>(k)]++;
    }
    for (int c : used) CHECK(c <= 1);  // no slot claimed twice
  }
}

TEST_CASE("deterministic lexicographic tie-break") {
  SUBCASE("all-equal costs pick the identity") {
    auto inst = raw_instance({{1, 1, 1}, {1, 1, 1}, {1, 1, 1}});
    const auto sol = solve(inst);
    REQUIRE(sol);
    CHECK(sol->slot_of_drone == std::vector<int>{0, 1, 2});
  }
  SUBCASE("symmetric two-way tie prefers the lower slot for drone 0") {
    auto inst = raw_instance({{5, 5}, {5, 5}});
    const auto sol = solve(inst);
    REQUIRE(sol);
    CHECK(sol->slot_of_drone == std::vector<int>{0, 1});
  }
  SUBCASE("tie-break never overrides a strictly cheaper matching") {
    auto inst = raw_instance({{5, 4}, {4, 5}});
    const auto sol = solve(inst);
    REQUIRE(sol);
    CHECK(sol->total_cost == 8.0);
    CHECK(sol->slot_of_drone == std::vector<int>{1, 0});
  }
  SUBCASE("repeat solves are identical") {
    Rng rng(42);
    const AllocationInstance inst = random_feasible_instance(rng);
    const auto a = solve(inst);
    const auto b = solve(inst);
    REQUIRE(a);
    REQUIRE(b);
    CHECK(a->slot_of_drone == b->slot_of_drone);
    CHECK(a->total_cost == b->total_cost);
  }
}

TEST_CASE("feasibility audit") {
  MissionConfig cfg = table_config();
  const RoverPath path = straight_path({0, 0}, {1, 0}, 600.0);
  const double s_rover = 0.0;

  std::vector<DroneState> fleet;
  fleet.push_back(drone_at(10, 0, Mode::Explore, 10));
  fleet[0].slot = 2;  // slot at x=10: distance 0
  std::vector<std::optional<int64_t>> prev_slot{fleet[0].slot};
  std::vector<Mode> prev_mode{Mode::Explore};

  SUBCASE("healthy state passes") {
    const auto rep = audit_feasibility(fleet, s_rover, path, prev_slot, prev_mode, cfg);
    CHECK(rep.ok);
  }
  SUBCASE("exploring without a slot fails") {
    fleet[0].slot.reset();
    const auto rep = audit_feasibility(fleet, s_rover, path, prev_slot, prev_mode, cfg);
    CHECK_FALSE(rep.ok);
  }
  SUBCASE("endurance exhaustion fails") {
    fleet[0].t_i = cfg.t_a + 1;
    const auto rep = audit_feasibility(fleet, s_rover, path, prev_slot, prev_mode, cfg);
    CHECK_FALSE(rep.ok);
  }
  SUBCASE("unreachable slot fails") {
    fleet[0].t_i = cfg.t_a - 1;
    fleet[0].p = {500, 0};  // 490 m from slot 2, one step of endurance left
    const auto rep = audit_feasibility(fleet, s_rover, path, prev_slot, prev_mode, cfg);
    CHECK_FALSE(rep.ok);
  }
  SUBCASE("returning drone must keep its slot") {
    fleet[0].mode = Mode::Return;
    prev_mode[0] = Mode::Return;
    prev_slot[0] = 3;
    const auto rep = audit_feasibility(fleet, s_rover, path, prev_slot, prev_mode, cfg);
    CHECK_FALSE(rep.ok);
  }
  SUBCASE("fresh departure must reset the endurance clock") {
    prev_mode[0] = Mode::Charge;
    fleet[0].t_i = 5;
    const auto rep = audit_feasibility(fleet, s_rover, path, prev_slot, prev_mode, cfg);
    CHECK_FALSE(rep.ok);
  }
  SUBCASE("charging away from the slot fails") {
    fleet[0].mode = Mode::Charge;
    prev_mode[0] = Mode::Charge;
    fleet[0].p = {100, 100};
    const auto rep = audit_feasibility(fleet, s_rover, path, prev_slot, prev_mode, cfg);
    CHECK_FALSE(rep.ok);
  }
  SUBCASE("a slot claimed twice fails") {
    fleet[0].mode = Mode::Return;
    fleet.push_back(drone_at(12, 0, Mode::Return, 10));
    fleet[1].slot = 2;
    prev_slot = {fleet[0].slot, fleet[1].slot};
    prev_mode = {Mode::Return, Mode::Return};
    const auto rep = audit_feasibility(fleet, s_rover, path, prev_slot, prev_mode, cfg);
    CHECK_FALSE(rep.ok);
  }
}
