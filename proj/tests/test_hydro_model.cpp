#include <doctest.h>

#include <cmath>
#include <random>

#include "hydro_adp/errors.hpp"
#include "hydro_adp/hydro_model.hpp"
#include "hydro_adp/lp.hpp"
#include "oracles.hpp"

using namespace hydro_adp;

namespace {

const std::string data_dir = HYDRO_ADP_DATA_DIR;

ReservoirSystem cascade() { return load_system(data_dir + "/norwegian_cascade.json"); }
ReservoirSystem network() { return load_system(data_dir + "/kwo_network.json"); }

ReservoirSystem single(double level_min, double level_max, double level0, double dmax, double g, double spill = 0.0) {
  return ReservoirSystem::make_cascade({{1, level_min, level_max, 0.0, dmax, level0, g, spill}}, {});
}

StageDecision discharge(std::vector<double> d) {
  StageDecision s;
  s.discharge = std::move(d);
  return s;
}

StageDecision flows(std::vector<double> f) {
  StageDecision s;
  s.flow = std::move(f);
  return s;
}

double lp_value(const LpProblem& p) {
  const LpSolution s = solve(p);
  REQUIRE(s.optimal());
  return s.value;
}

}  // namespace

TEST_CASE("zero action is feasible for in-bound levels") {
  const auto s = cascade();
  const StageExogenous exo{1, 20.0, {0.0, 0.0}};
  CHECK(feasible(s, std::vector<double>{500.0, 500.0}, exo, std::vector<double>{0.0, 0.0}, discharge({0.0, 0.0})));
}

TEST_CASE("discharge above the upper reservoir maximum is infeasible") {
  const auto s = cascade();
  const StageExogenous exo{1, 20.0, {0.0, 0.0}};
  const std::vector<double> level{500.0, 500.0}, zero{0.0, 0.0};
  CHECK_FALSE(feasible(s, level, exo, zero, discharge({57.97, 0.0})));
  CHECK(feasible(s, level, exo, zero, discharge({57.96, 0.0})));
}

TEST_CASE("discharging below the minimum level is infeasible") {
  const auto s = single(10.0, 100.0, 10.0, 5.0, 1.0);
  const StageExogenous exo{1, 1.0, {0.0}};
  CHECK_FALSE(feasible(s, std::vector<double>{10.0}, exo, std::vector<double>{0.0}, discharge({1.0})));
  CHECK(feasible(s, std::vector<double>{10.0}, exo, std::vector<double>{1.0}, discharge({1.0})));
}

TEST_CASE("feasibility checks dimensions") {
  const auto s = cascade();
  const StageExogenous exo{1, 20.0, {0.0, 0.0}};
  CHECK_THROWS_AS(feasible(s, std::vector<double>{1.0}, exo, std::vector<double>{0.0, 0.0}, discharge({0.0, 0.0})),
                  ContractViolation);
  CHECK_THROWS_AS(feasible(s, std::vector<double>{500.0, 500.0}, exo, std::vector<double>{0.0, 0.0}, discharge({0.0})),
                  ContractViolation);
}

TEST_CASE("network feasibility includes the incidence limits") {
  const auto s = network();
  std::vector<double> level;
  for (const auto& r : s.reservoirs()) level.push_back(0.5 * (r.level_min + r.level_max));
  const std::vector<double> zero(6, 0.0);
  const StageExogenous exo{1, 20.0, zero};
  std::vector<double> f(10, 0.0);
  CHECK(feasible(s, level, exo, zero, flows(f)));
  // Tunnel 0 releases 1 -> 4 with capacity 2.52 but reservoir 1 may only release 2.39.
  f[0] = 2.45;
  CHECK_FALSE(feasible(s, level, exo, zero, flows(f)));
  f[0] = 2.3;
  CHECK(feasible(s, level, exo, zero, flows(f)));
}

TEST_CASE("stage profit") {
  const auto s = cascade();
  CHECK(stage_profit(s, {1, 0.0, {0.0, 0.0}}, discharge({5.0, 5.0})) == 0.0);
  CHECK(stage_profit(s, {1, 20.0, {0.0, 0.0}}, discharge({1.0, 1.0})) == doctest::Approx(12.304).epsilon(1e-12));
  const auto n = network();
  std::vector<double> f(10, 0.0);
  f[0] = 1.0;  // release 1 -> 4, g = 0.1
  CHECK(stage_profit(n, {1, 10.0, std::vector<double>(6, 0.0)}, flows(f)) == doctest::Approx(1.0));
  f[0] = 0.0;
  f[1] = 1.0;  // pump 4 -> 1 costs energy
  CHECK(stage_profit(n, {1, 10.0, std::vector<double>(6, 0.0)}, flows(f)) == doctest::Approx(-1.0));
}

TEST_CASE("advance level") {
  const auto s = cascade();
  const std::vector<double> level{400.0, 300.0}, zero{0.0, 0.0};
  CHECK(advance_level(s, level, zero, discharge({0.0, 0.0})) == level);
  const auto moved = advance_level(s, level, std::vector<double>{2.0, 3.0}, discharge({10.0, 0.0}));
  CHECK(moved[0] == doctest::Approx(392.0));
  CHECK(moved[1] == doctest::Approx(313.0));

  const auto n = network();
  std::vector<double> nl(6, 5.0);
  std::vector<double> f(10, 0.0);
  f[1] = 1.0;  // pump from 4 into 1
  const auto after = advance_level(n, nl, std::vector<double>(6, 0.0), flows(f));
  CHECK(after[3] == doctest::Approx(4.0));
  CHECK(after[0] == doctest::Approx(5.6));
  double total = 0.0;
  for (double v : after) total += v;
  CHECK(total == doctest::Approx(30.0 - 0.4));
}

TEST_CASE("mass balance holds exactly for random cascade decisions") {
  const auto s = cascade();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const std::vector<double> level{113.0 + 1000.0 * u(rng), 100.0 + 900.0 * u(rng)};
    const std::vector<double> inflow{60.0 * u(rng), 60.0 * u(rng)};
    StageDecision d = discharge({57.96 * u(rng), 121.36 * u(rng)});
    d.spill = {10.0 * u(rng), 10.0 * u(rng)};
    const auto next = advance_level(s, level, inflow, d);
    double lhs = 0.0;
    for (std::size_t j = 0; j < 2; ++j) lhs += next[j] - level[j] - inflow[j];
    // Only the bottom reservoir's outflow leaves the system.
    CHECK(std::abs(lhs + d.discharge[1] + d.spill[1]) <= 1e-9);
  }
}

TEST_CASE("network water is conserved up to pumping losses and spill") {
  const auto s = network();
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    std::vector<double> level(6), inflow(6);
    StageDecision d;
    for (std::size_t j = 0; j < 6; ++j) {
      level[j] = 100.0 * u(rng);
      inflow[j] = u(rng);
    }
    double pumped = 0.0;
    for (std::size_t g = 0; g < 10; ++g) {
      d.flow.push_back(3.0 * u(rng));
      if (s.tunnel_sign(g) < 0) pumped += d.flow.back();
    }
    for (std::size_t j = 0; j < 6; ++j) d.spill.push_back(u(rng));
    const auto next = advance_level(s, level, inflow, d);
    double lhs = 0.0, spill = 0.0;
    for (std::size_t j = 0; j < 6; ++j) {
      lhs += next[j] - level[j] - inflow[j];
      spill += d.spill[j];
    }
    CHECK(std::abs(lhs + (1.0 - s.pump_efficiency()) * pumped + spill) <= 1e-9);
  }
}

TEST_CASE("stage LP with zero price and zero continuation has value zero") {
  const auto s = single(0.0, 10.0, 5.0, 2.0, 1.0);
  const std::vector<double> lvl{5.0}, zero{0.0};
  CHECK(lp_value(build_stage_lp(s, lvl, zero, {1, 0.0, {0.0}}, zero, 0.0)) == 0.0);
}

TEST_CASE("cascade stage LP matches grid enumeration") {
  const auto s = cascade();
  const std::vector<double> level{124.3, 110.0}, zero{0.0, 0.0};
  const StageExogenous exo{1, 20.0, {0.0, 0.0}};
  const double v = lp_value(build_stage_lp(s, level, zero, exo, zero, 0.0));
  // With no continuation value spilling earns nothing, so enumerate discharges only.
  double best = -1.0;
  for (int i = 0; i <= 5796; ++i) {
    const double p1 = 0.01 * i;
    const double upper = 124.3 - p1;
    if (upper < 113.0 - 1e-9) break;
    for (int k = 0; k <= 12136; ++k) {
      const double p2 = 0.01 * k;
      const double lower = 110.0 + p1 - p2;
      if (lower < 100.0 - 1e-9) break;
      if (lower > 1000.0 + 1e-9) continue;
      best = std::max(best, 20.0 * (0.1101 * p1 + 0.5051 * p2));
    }
  }
  CHECK(std::abs(v - best) <= 1e-6 * best);
}

TEST_CASE("a lone pump tunnel is never used without continuation value") {
  ReservoirSpec lo{1, 0.0, 10.0, 0.0, 5.0, 5.0, 0.0, 0.0};
  ReservoirSpec hi = lo;
  hi.id = 2;
  const auto s = ReservoirSystem::make_network({lo, hi}, {{1, 2, TunnelDirection::pump, 0.5, 3.0}}, 0.6);
  const std::vector<double> level{5.0, 5.0}, zero{0.0, 0.0};
  const LpSolution sol = solve(build_stage_lp(s, level, zero, {1, 30.0, zero}, zero, 0.0));
  REQUIRE(sol.optimal());
  CHECK(decision_from_lp(s, sol.x).flow[0] == doctest::Approx(0.0));
  CHECK(sol.value == doctest::Approx(0.0));
}

TEST_CASE("stage LP value matches the objective of its decision") {
  const auto s = cascade();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    const std::vector<double> level{200.0 + 800.0 * u(rng), 150.0 + 700.0 * u(rng)};
    const std::vector<double> inflow{50.0 * u(rng), 50.0 * u(rng)};
    const StageExogenous exo{2, 30.0 * u(rng), {50.0 * u(rng), 50.0 * u(rng)}};
    const std::vector<double> a{10.0 * u(rng), 10.0 * u(rng)};
    const double c = 100.0 * u(rng);
    const LpProblem p = build_stage_lp(s, level, inflow, exo, a, c);
    const LpSolution sol = solve(p);
    REQUIRE(sol.optimal());
    const StageDecision d = decision_from_lp(s, sol.x);
    const std::vector<double> pre{level[0] + inflow[0], level[1] + inflow[1]};
    CHECK(feasible(s, pre, exo, exo.inflows, d));
    const auto post = advance_level(s, level, inflow, d);
    const double direct = stage_profit(s, exo, d) + a[0] * post[0] + a[1] * post[1] + c;
    CHECK(sol.value == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("terminal stage values leftover water at the forecast price") {
  const auto s = single(0.0, 10.0, 5.0, 2.0, 1.0);
  const std::vector<double> level{5.0}, zero{0.0};
  // Price now 1, forecast 3: keep the water, value 3 * (5 + 1).
  const LpSolution sol = solve(build_stage_lp(s, level, zero, {1, 1.0, {1.0}}, {}, 0.0, 3.0));
  REQUIRE(sol.optimal());
  CHECK(sol.value == doctest::Approx(18.0));
  CHECK(decision_from_lp(s, sol.x).discharge[0] == doctest::Approx(0.0));
}

TEST_CASE("stage value is non-decreasing in the starting levels") {
  const auto s = cascade();
  const std::vector<double> a{3.0, 8.0}, zero{0.0, 0.0};
  const StageExogenous exo{2, 25.0, {40.0, 30.0}};
  for (double base1 = 150.0; base1 <= 1050.0; base1 += 150.0) {
    double prev = -1e300;
    for (double base2 = 120.0; base2 <= 950.0; base2 += 110.0) {
      const double v = lp_value(build_stage_lp(s, std::vector<double>{base1, base2}, zero, exo, a, 0.0));
      CHECK(v >= prev - 1e-9);
      prev = v;
      const double up = lp_value(build_stage_lp(s, std::vector<double>{base1 + 10.0, base2}, zero, exo, a, 0.0));
      CHECK(up >= v - 1e-9);
    }
  }
}

TEST_CASE("network optima never pump and release on the same pair") {
  const auto s = network();
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::vector<double> zero(6, 0.0);
  for (int k = 0; k < 30; ++k) {
    std::vector<double> level, inflow(6);
    for (const auto& r : s.reservoirs()) level.push_back(r.level_min + u(rng) * (r.level_max - r.level_min) * 0.8);
    for (auto& v : inflow) v = 0.1 * u(rng);
    const LpSolution sol = solve(build_stage_lp(s, level, zero, {1, 40.0 * u(rng), inflow}, zero, 0.0));
    REQUIRE(sol.optimal());
    const StageDecision d = decision_from_lp(s, sol.x);
    for (std::size_t g = 0; g + 1 < 10; g += 2) CHECK(std::min(d.flow[g], d.flow[g + 1]) <= 1e-9);
  }
}

TEST_CASE("sample layout helpers") {
  const auto s = cascade();
  const StageLayout l = StageLayout::of(s);
  CHECK(l.num_vars == 6);
  const auto n = network();
  const StageLayout ln = StageLayout::of(n);
  CHECK(ln.num_action == 10);
  CHECK(ln.num_vars == 10 + 4 * 6);
}
