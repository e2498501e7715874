#pragma once

#include <vector>

#include "hydro_adp/hydro_model.hpp"
#include "hydro_adp/lp.hpp"
#include "hydro_adp/system.hpp"

namespace hydro_adp {

/// Perfect-foresight optimum of one sample path.
struct FullHorizonSolution {
  LpSolution lp;
  std::vector<StageDecision> schedule;      // stages 1..T
  std::vector<std::vector<double>> levels;  // level after stage t's decision and inflow
};

/// Stacks the T stage problems of `path` into one LP: maximize
/// sum_t price_t * generation_t + terminal_price * g^T level_T starting from
/// the system's initial levels.
LpProblem build_full_horizon_lp(const ReservoirSystem& system, const SamplePath& path);

/// Solves the stacked LP. Throws NumericalError if it is infeasible.
FullHorizonSolution solve_full_horizon(const ReservoirSystem& system, const SamplePath& path);

}  // namespace hydro_adp
