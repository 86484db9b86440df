#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "nemarb/oracle.hpp"
#include "nemarb/solver.hpp"
#include "helpers.hpp"

using namespace nemarb;
using nemarb::testing::basic_instance;
using nemarb::testing::intermediate_ramp_example;
using nemarb::testing::random_instance;

TEST_CASE("grid oracle reproduces the 10-hour example") {
  const auto inst = intermediate_ramp_example();
  DpConfig cfg;
  cfg.grid_points = 2901;  // 1 Wh spacing over 2.9 kWh
  const DpResult res = dp_solve(inst, cfg);
  CHECK_THAT(res.total_cost, Catch::Matchers::WithinAbs(-14.888888888888889, 0.02));
  REQUIRE(res.trajectory.size() == 10);
  for (double level : res.trajectory) {
    CHECK(level >= inst.battery.b_min - kTol);
    CHECK(level <= inst.battery.b_max + kTol);
  }
}

TEST_CASE("zero ramp collapses to the no-storage cost") {
  auto inst = basic_instance(6, 0.2, 0.1);
  inst.load.z = {1.0, -0.5, 0.3, -0.2, 0.8, -1.4};
  inst.battery.delta_min = inst.battery.delta_max = 0.0;
  const DpResult res = dp_solve(inst, DpConfig{});
  CHECK_THAT(res.total_cost, Catch::Matchers::WithinAbs(no_storage_cost(inst), 1e-12));
}

TEST_CASE("single step agrees with the closed-form minimum") {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 200; ++t) {
    const auto inst = random_instance(rng, 1, 1);
    // one-step piecewise-linear cost: the optimum sits at a kink or a bound
    double exact = std::numeric_limits<double>::infinity();
    for (double x : {inst.x_min(0), inst.x_max(0), 0.0,
                     std::clamp(storage_input(-inst.z(0), inst.battery), inst.x_min(0),
                                inst.x_max(0))}) {
      const double cap_lo = inst.battery.b_min - inst.battery.b0;
      const double cap_hi = inst.battery.b_max - inst.battery.b0;
      exact = std::min(exact, step_cost(0, std::clamp(x, cap_lo, cap_hi), inst));
    }
    DpConfig cfg;
    const DpResult res = dp_solve(inst, cfg);
    CHECK(res.total_cost >= exact - 1e-9);
    CHECK(res.total_cost <= exact + cfg.resolved_tolerance(inst));
  }
}

TEST_CASE("finer nested grids never cost more") {
  std::mt19937_64 rng(29);
  for (int t = 0; t < 25; ++t) {
    const auto inst = random_instance(rng, 2, 10);
    DpConfig coarse;
    coarse.grid_points = 101;
    DpConfig fine;
    fine.grid_points = 201;  // contains every coarse level
    const double c = dp_solve(inst, coarse).total_cost;
    const double f = dp_solve(inst, fine).total_cost;
    CHECK(f <= c + 1e-12);
  }
}

TEST_CASE("unimodal stage search equals the exhaustive scan") {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 40; ++t) {
    const auto inst = random_instance(rng, 1, 8);
    DpConfig cfg;
    cfg.grid_points = 301;
    const double fast = dp_solve(inst, cfg, false).total_cost;
    const double scan = dp_solve(inst, cfg, true).total_cost;
    CHECK(fast == scan);
  }
}

TEST_CASE("comparison report directions") {
  const auto inst = intermediate_ramp_example();
  DpConfig cfg;

  SECTION("the solver passes") {
    const CompareReport rep = compare(inst, cfg);
    CHECK(rep.pass);
    CHECK(rep.solver_cost <= rep.dp_cost + 1e-9);
  }
  SECTION("a greedy policy fails with a positive gap") {
    // charge whenever the price is below the horizon mean, else discharge
    double mean = 0.0;
    for (double p : inst.tariff.buy) mean += p;
    mean /= inst.n();
    std::vector<double> x(static_cast<size_t>(inst.n()));
    double level = inst.battery.b0;
    for (int i = 0; i < inst.n(); ++i) {
      double move = inst.buy(i) < mean ? inst.x_max(i) : inst.x_min(i);
      move = std::clamp(move, inst.battery.b_min - level, inst.battery.b_max - level);
      x[static_cast<size_t>(i)] = move;
      level += move;
    }
    const double greedy_cost = total_cost(x, inst);
    const double dp_cost = dp_solve(inst, cfg).total_cost;
    const CompareReport rep =
        make_compare_report(greedy_cost, dp_cost, cfg.resolved_tolerance(inst));
    CHECK_FALSE(rep.pass);
    CHECK(rep.gap > 0.0);
  }
}

TEST_CASE("terminal pin restricts the final level") {
  auto inst = basic_instance(3, 0.2, 0.1);
  inst.battery = {0.0, 2.0, 1.0, -0.5, 0.5, 1.0, 1.0};
  DpConfig cfg;
  cfg.grid_points = 401;
  cfg.terminal_level = 1.0;
  const DpResult res = dp_solve(inst, cfg);
  REQUIRE(res.trajectory.size() == 3);
  CHECK_THAT(res.trajectory.back(), Catch::Matchers::WithinAbs(1.0, 0.01));
  // pinning can only cost more than the free terminal
  CHECK(res.total_cost >= dp_solve(inst, DpConfig{}).total_cost - 1e-12);
}
