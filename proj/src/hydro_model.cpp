#include "hydro_adp/hydro_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hydro_adp/errors.hpp"

namespace hydro_adp {
namespace {

void expect_size(std::size_t got, std::size_t want, const char* what) {
  if (got != want)
    throw ContractViolation(std::string(what) + ": expected " + std::to_string(want) + " entries, got " +
                            std::to_string(got));
}

void check_decision(const ReservoirSystem& s, const StageDecision& d) {
  const std::size_t n = s.num_reservoirs();
  if (s.is_cascade()) {
    expect_size(d.discharge.size(), n, "decision.discharge");
  } else {
    expect_size(d.flow.size(), s.num_tunnels(), "decision.flow");
  }
  if (!d.spill.empty()) expect_size(d.spill.size(), n, "decision.spill");
}

bool within(double v, double lo, double hi) {
  const double tol = 1e-9 * (1.0 + std::max(std::abs(lo), std::abs(hi)));
  return v >= lo - tol && v <= hi + tol;
}

double spill_of(const StageDecision& d, std::size_t j) { return d.spill.empty() ? 0.0 : d.spill[j]; }

}  // namespace

StageLayout StageLayout::of(const ReservoirSystem& system) {
  const std::size_t n = system.num_reservoirs();
  StageLayout l;
  l.action = 0;
  if (system.is_cascade()) {
    l.num_action = n;
    l.spill = n;
    l.next_level = 2 * n;
    l.num_vars = 3 * n;
  } else {
    const std::size_t g = system.num_tunnels();
    l.num_action = g;
    l.spill = g;
    l.released = g + n;
    l.pumped = g + 2 * n;
    l.next_level = g + 3 * n;
    l.num_vars = g + 4 * n;
  }
  return l;
}

std::vector<double> released(const ReservoirSystem& system, const StageDecision& decision) {
  check_decision(system, decision);
  if (system.is_cascade()) return decision.discharge;
  const DenseMatrix& rd = system.release_incidence();
  std::vector<double> out(system.num_reservoirs(), 0.0);
  for (std::size_t j = 0; j < out.size(); ++j)
    for (std::size_t k = 0; k < system.num_tunnels(); ++k) out[j] += rd(j, k) * decision.flow[k];
  return out;
}

std::vector<double> pumped_in(const ReservoirSystem& system, const StageDecision& decision) {
  check_decision(system, decision);
  std::vector<double> out(system.num_reservoirs(), 0.0);
  if (system.is_cascade()) return out;
  const DenseMatrix& rc = system.pump_incidence();
  for (std::size_t j = 0; j < out.size(); ++j)
    for (std::size_t k = 0; k < system.num_tunnels(); ++k) out[j] += rc(j, k) * decision.flow[k];
  return out;
}

std::vector<double> level_change(const ReservoirSystem& system, const StageDecision& decision) {
  check_decision(system, decision);
  const std::size_t n = system.num_reservoirs();
  std::vector<double> delta(n, 0.0);
  if (system.is_cascade()) {
    const DenseMatrix& r = system.cascade_matrix();
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) delta[j] += r(j, k) * (decision.discharge[k] + spill_of(decision, k));
  } else {
    const DenseMatrix& nb = system.network_balance();
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < system.num_tunnels(); ++k) delta[j] += nb(j, k) * decision.flow[k];
      delta[j] -= spill_of(decision, j);
    }
  }
  return delta;
}

bool feasible(const ReservoirSystem& system, std::span<const double> level_pre, const StageExogenous& /*exo_now*/,
              std::span<const double> next_inflow, const StageDecision& decision) {
  const std::size_t n = system.num_reservoirs();
  expect_size(level_pre.size(), n, "level_pre");
  expect_size(next_inflow.size(), n, "next_inflow");
  check_decision(system, decision);
  const auto& rs = system.reservoirs();

  for (std::size_t j = 0; j < n; ++j)
    if (!within(spill_of(decision, j), 0.0, rs[j].spill_max)) return false;

  if (system.is_cascade()) {
    for (std::size_t j = 0; j < n; ++j)
      if (!within(decision.discharge[j], rs[j].discharge_min, rs[j].discharge_max)) return false;
  } else {
    for (std::size_t k = 0; k < system.num_tunnels(); ++k)
      if (!within(decision.flow[k], 0.0, system.tunnels()[k].flow_max)) return false;
    const auto out = released(system, decision);
    const auto in = pumped_in(system, decision);
    for (std::size_t j = 0; j < n; ++j) {
      if (!within(out[j], rs[j].discharge_min, rs[j].discharge_max)) return false;
      if (!within(in[j], rs[j].discharge_min, rs[j].discharge_max)) return false;
    }
  }

  const auto delta = level_change(system, decision);
  for (std::size_t j = 0; j < n; ++j)
    if (!within(level_pre[j] + delta[j] + next_inflow[j], rs[j].level_min, rs[j].level_max)) return false;
  return true;
}

std::vector<double> advance_level(const ReservoirSystem& system, std::span<const double> level_post_prev,
                                  std::span<const double> inflow_now, const StageDecision& decision) {
  const std::size_t n = system.num_reservoirs();
  expect_size(level_post_prev.size(), n, "level_post_prev");
  expect_size(inflow_now.size(), n, "inflow_now");
  auto delta = level_change(system, decision);
  for (std::size_t j = 0; j < n; ++j) delta[j] += level_post_prev[j] + inflow_now[j];
  return delta;
}

double stage_profit(const ReservoirSystem& system, const StageExogenous& exo, const StageDecision& decision) {
  check_decision(system, decision);
  double energy = 0.0;
  if (system.is_cascade()) {
    for (std::size_t j = 0; j < system.num_reservoirs(); ++j)
      energy += system.reservoirs()[j].conversion_rate * decision.discharge[j];
  } else {
    for (std::size_t k = 0; k < system.num_tunnels(); ++k)
      energy += system.tunnel_sign(k) * system.tunnels()[k].conversion_rate * decision.flow[k];
  }
  return exo.price * energy;
}

LpProblem build_stage_lp(const ReservoirSystem& system, std::span<const double> level_post_prev,
                         std::span<const double> inflow_now, const StageExogenous& exo_next,
                         std::span<const double> a_next, double affine_const, std::optional<double> terminal_price) {
  const std::size_t n = system.num_reservoirs();
  expect_size(level_post_prev.size(), n, "level_post_prev");
  expect_size(inflow_now.size(), n, "inflow_now");
  expect_size(exo_next.inflows.size(), n, "exo_next.inflows");

  std::vector<double> slope(n);
  double constant = affine_const;
  if (terminal_price) {
    const auto g = system.terminal_conversion();
    for (std::size_t j = 0; j < n; ++j) {
      slope[j] = *terminal_price * g[j];
      constant += slope[j] * exo_next.inflows[j];
    }
  } else {
    expect_size(a_next.size(), n, "a_next");
    std::copy(a_next.begin(), a_next.end(), slope.begin());
  }

  const auto& rs = system.reservoirs();
  const StageLayout lay = StageLayout::of(system);
  const bool cascade = system.is_cascade();
  const std::size_t rows = cascade ? n : 3 * n;

  LpProblem p;
  p.objective.assign(lay.num_vars, 0.0);
  p.lower.assign(lay.num_vars, 0.0);
  p.upper.assign(lay.num_vars, 0.0);
  p.eq_matrix = DenseMatrix(rows, lay.num_vars);
  p.eq_rhs.assign(rows, 0.0);

  // Balance rows: change(decision) - next_level = -(level_post_prev + inflow_now + next_inflow).
  for (std::size_t j = 0; j < n; ++j) {
    const double base = level_post_prev[j] + inflow_now[j];
    p.eq_rhs[j] = -(base + exo_next.inflows[j]);
    p.eq_matrix(j, lay.next_level + j) = -1.0;
    p.lower[lay.next_level + j] = rs[j].level_min;
    p.upper[lay.next_level + j] = rs[j].level_max;
    p.lower[lay.spill + j] = 0.0;
    p.upper[lay.spill + j] = rs[j].spill_max;
    constant += slope[j] * base;
  }

  if (cascade) {
    const DenseMatrix& r = system.cascade_matrix();
    for (std::size_t k = 0; k < n; ++k) {
      p.lower[lay.action + k] = rs[k].discharge_min;
      p.upper[lay.action + k] = rs[k].discharge_max;
      double water_value = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        p.eq_matrix(j, lay.action + k) = r(j, k);
        p.eq_matrix(j, lay.spill + k) = r(j, k);
        water_value += slope[j] * r(j, k);
      }
      p.objective[lay.action + k] = exo_next.price * rs[k].conversion_rate + water_value;
      p.objective[lay.spill + k] = water_value;
    }
  } else {
    const DenseMatrix& nb = system.network_balance();
    const DenseMatrix& rd = system.release_incidence();
    const DenseMatrix& rc = system.pump_incidence();
    for (std::size_t k = 0; k < system.num_tunnels(); ++k) {
      const TunnelSpec& t = system.tunnels()[k];
      p.upper[lay.action + k] = t.flow_max;
      double water_value = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        p.eq_matrix(j, lay.action + k) = nb(j, k);
        p.eq_matrix(n + j, lay.action + k) = rd(j, k);
        p.eq_matrix(2 * n + j, lay.action + k) = rc(j, k);
        water_value += slope[j] * nb(j, k);
      }
      p.objective[lay.action + k] = exo_next.price * system.tunnel_sign(k) * t.conversion_rate + water_value;
    }
    for (std::size_t j = 0; j < n; ++j) {
      p.eq_matrix(j, lay.spill + j) = -1.0;
      p.objective[lay.spill + j] = -slope[j];
      p.eq_matrix(n + j, lay.released + j) = -1.0;
      p.eq_matrix(2 * n + j, lay.pumped + j) = -1.0;
      p.lower[lay.released + j] = rs[j].discharge_min;
      p.upper[lay.released + j] = rs[j].discharge_max;
      p.lower[lay.pumped + j] = rs[j].discharge_min;
      p.upper[lay.pumped + j] = rs[j].discharge_max;
    }
  }
  p.objective_offset = constant;
  return p;
}

StageDecision decision_from_lp(const ReservoirSystem& system, std::span<const double> x) {
  const StageLayout lay = StageLayout::of(system);
  expect_size(x.size(), lay.num_vars, "stage lp solution");
  const std::size_t n = system.num_reservoirs();
  StageDecision d;
  auto take = [&](std::size_t from, std::size_t count) {
    return std::vector<double>(x.begin() + static_cast<std::ptrdiff_t>(from),
                               x.begin() + static_cast<std::ptrdiff_t>(from + count));
  };
  if (system.is_cascade()) {
    d.discharge = take(lay.action, n);
  } else {
    d.flow = take(lay.action, system.num_tunnels());
  }
  d.spill = take(lay.spill, n);
  return d;
}

}  // namespace hydro_adp
