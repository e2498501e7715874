#include "hydro_adp/full_horizon.hpp"

#include <string>

#include "hydro_adp/errors.hpp"

namespace hydro_adp {

LpProblem build_full_horizon_lp(const ReservoirSystem& system, const SamplePath& path) {
  const std::size_t n = system.num_reservoirs();
  const std::size_t horizon = path.horizon();
  if (horizon == 0) throw ContractViolation("full horizon: empty sample path");
  if (path.inflows.size() != horizon)
    throw ContractViolation("full horizon: inflow rows do not match the number of prices");

  const StageLayout lay = StageLayout::of(system);
  const std::vector<double> zeros(n, 0.0);
  const std::vector<double> initial = system.initial_levels();

  std::vector<LpProblem> stages;
  stages.reserve(horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    // Stage 1 starts from the initial levels; later stages get the previous
    // level variable through the coupling entries added below.
    const auto& start = t == 0 ? initial : zeros;
    stages.push_back(build_stage_lp(system, zeros, start, path.stage(t), zeros, 0.0));
  }

  const std::size_t stage_rows = stages.front().num_rows();
  LpProblem p;
  p.objective.assign(horizon * lay.num_vars, 0.0);
  p.lower.assign(horizon * lay.num_vars, 0.0);
  p.upper.assign(horizon * lay.num_vars, 0.0);
  p.eq_rhs.assign(horizon * stage_rows, 0.0);
  p.eq_matrix = DenseMatrix(horizon * stage_rows, horizon * lay.num_vars);

  for (std::size_t t = 0; t < horizon; ++t) {
    const LpProblem& s = stages[t];
    const std::size_t c0 = t * lay.num_vars;
    const std::size_t r0 = t * stage_rows;
    for (std::size_t j = 0; j < lay.num_vars; ++j) {
      p.objective[c0 + j] = s.objective[j];
      p.lower[c0 + j] = s.lower[j];
      p.upper[c0 + j] = s.upper[j];
    }
    for (std::size_t i = 0; i < stage_rows; ++i) {
      p.eq_rhs[r0 + i] = s.eq_rhs[i];
      for (std::size_t j = 0; j < lay.num_vars; ++j) p.eq_matrix(r0 + i, c0 + j) = s.eq_matrix(i, j);
    }
    if (t > 0) {
      const std::size_t prev_level = c0 - lay.num_vars + lay.next_level;
      for (std::size_t j = 0; j < n; ++j) p.eq_matrix(r0 + j, prev_level + j) = 1.0;
    }
  }

  const auto g = system.terminal_conversion();
  const std::size_t last_level = (horizon - 1) * lay.num_vars + lay.next_level;
  for (std::size_t j = 0; j < n; ++j) p.objective[last_level + j] += path.terminal_price * g[j];
  return p;
}

FullHorizonSolution solve_full_horizon(const ReservoirSystem& system, const SamplePath& path) {
  const LpProblem p = build_full_horizon_lp(system, path);
  FullHorizonSolution out;
  out.lp = solve(p);
  if (!out.lp.optimal()) throw NumericalError("full horizon LP is infeasible");

  const StageLayout lay = StageLayout::of(system);
  const std::size_t n = system.num_reservoirs();
  for (std::size_t t = 0; t < path.horizon(); ++t) {
    std::span<const double> stage_x(out.lp.x.data() + t * lay.num_vars, lay.num_vars);
    out.schedule.push_back(decision_from_lp(system, stage_x));
    out.levels.emplace_back(stage_x.begin() + static_cast<std::ptrdiff_t>(lay.next_level),
                            stage_x.begin() + static_cast<std::ptrdiff_t>(lay.next_level + n));
  }
  return out;
}

}  // namespace hydro_adp
