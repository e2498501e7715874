#pragma once

#include <optional>
#include <span>
#include <vector>

#include "hydro_adp/lp.hpp"
#include "hydro_adp/system.hpp"

namespace hydro_adp {

/// Exogenous information revealed at one stage (hour).
struct StageExogenous {
  int t = 0;
  double price = 0.0;           // $/MWh
  std::vector<double> inflows;  // per reservoir, 10^3 m^3/h
};

/// One price/inflow trajectory over stages 1..T (index 0 is stage 1), with the
/// end-of-horizon price forecast used to value the water left over.
struct SamplePath {
  std::vector<double> prices;
  std::vector<std::vector<double>> inflows;  // [t][reservoir]
  double terminal_price = 0.0;

  std::size_t horizon() const { return prices.size(); }
  StageExogenous stage(std::size_t t) const { return {static_cast<int>(t) + 1, prices[t], inflows[t]}; }
};

/// One stage's action. A cascade uses `discharge`; a network uses `flow`
/// (per tunnel) and leaves `discharge` empty. `spill` is optional in both
/// (empty means no spilling).
struct StageDecision {
  std::vector<double> discharge;
  std::vector<double> flow;
  std::vector<double> spill;
};

/// Water released out of each reservoir (pi^d): the cascade discharge, or the
/// release-tunnel outflow of a network.
std::vector<double> released(const ReservoirSystem& system, const StageDecision& decision);
/// Water pumped into each reservoir before efficiency losses (pi^c); zeros for a cascade.
std::vector<double> pumped_in(const ReservoirSystem& system, const StageDecision& decision);

/// True iff the decision keeps every bound: discharge/flow boxes, the
/// incidence limits of a network and the next pre-decision level
/// level_pre + change + next_inflow within [level_min, level_max].
/// `level_pre` is the water in the reservoirs when the decision is taken.
bool feasible(const ReservoirSystem& system, std::span<const double> level_pre, const StageExogenous& exo_now,
              std::span<const double> next_inflow, const StageDecision& decision);

/// Level change caused by a decision (before any inflow).
std::vector<double> level_change(const ReservoirSystem& system, const StageDecision& decision);

/// Next post-decision level: level_post_prev + inflow_now + change(decision).
std::vector<double> advance_level(const ReservoirSystem& system, std::span<const double> level_post_prev,
                                  std::span<const double> inflow_now, const StageDecision& decision);

/// Revenue of a stage: price times generated minus pumped energy.
double stage_profit(const ReservoirSystem& system, const StageExogenous& exo, const StageDecision& decision);

/// Variable layout of a stage LP. Cascade: [discharge | spill | next_level];
/// network: [flow | spill | released | pumped | next_level].
struct StageLayout {
  std::size_t action = 0;  // first decision variable
  std::size_t num_action = 0;
  std::size_t spill = 0;
  std::size_t released = 0;  // network only
  std::size_t pumped = 0;    // network only
  std::size_t next_level = 0;
  std::size_t num_vars = 0;

  static StageLayout of(const ReservoirSystem& system);
};

/// Stage LP: maximize price * generation + a_next^T level_post + affine_const
/// over the stage feasible set, where level_post = level_post_prev +
/// inflow_now + change(decision). With `terminal_price` set the continuation
/// is the end-of-horizon water value: a_next is replaced by
/// terminal_price * terminal_conversion() and terminal_price * g^T next_inflow
/// is added to the constant.
LpProblem build_stage_lp(const ReservoirSystem& system, std::span<const double> level_post_prev,
                         std::span<const double> inflow_now, const StageExogenous& exo_next,
                         std::span<const double> a_next, double affine_const,
                         std::optional<double> terminal_price = std::nullopt);

/// Extracts the decision from a stage LP primal solution.
StageDecision decision_from_lp(const ReservoirSystem& system, std::span<const double> x);

}  // namespace hydro_adp
