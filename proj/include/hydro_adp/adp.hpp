#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hydro_adp/hydro_model.hpp"
#include "hydro_adp/lp.hpp"
#include "hydro_adp/scenarios.hpp"
#include "hydro_adp/system.hpp"

namespace hydro_adp {

struct TrainConfig {
  std::size_t n_samples = 1000;  // training iterations; iteration n uses one training path
  double alpha_initial = 0.5;
  double alpha_damping = 100.0;  // alpha_n = alpha_initial * d / (d + n - 1)
  double fd_step = 1.0;
  bool include_inflow_term = true;
  bool freeze_inflow_term = false;  // keep b at zero
  std::uint64_t seed = 0;           // training order

  void validate() const;
  double alpha(std::size_t n) const;
};

/// Affine surrogate of the post-decision value per stage t = 0..T-1:
///   V_t(level, inflow) ~ a_t^T level + b_t^T inflow + const_t.
/// Entry 0 describes the start state; the terminal stage is valued by the
/// price forecast instead.
struct ValueApproximation {
  std::size_t horizon = 0;
  std::string system_hash;
  TrainConfig config;
  std::vector<std::vector<double>> a;
  std::vector<std::vector<double>> b;
  std::vector<double> constant;
  std::vector<std::vector<double>> anchor_level;
  std::vector<std::vector<double>> anchor_inflow;

  /// Zero coefficients, anchors at the initial state.
  static ValueApproximation initial(const ReservoirSystem& system, std::size_t horizon, const TrainConfig& cfg);

  std::size_t num_reservoirs() const { return a.empty() ? 0 : a[0].size(); }
  /// Continuation value of entering stage t with the given post-decision level and inflow.
  double value(std::size_t t, std::span<const double> level, std::span<const double> inflow) const;
  void check_shape() const;
};

std::string to_json(const ValueApproximation& approx);
ValueApproximation parse_value_approximation(const std::string& json_text, const std::string& origin = "<string>");
void save_value_approximation(const ValueApproximation& approx, const std::filesystem::path& path);
ValueApproximation load_value_approximation(const std::filesystem::path& path);

struct StageSample {
  double value = 0.0;
  StageDecision decision;
  std::vector<double> level_post_next;
  LpSolution lp;
};

/// Solves the stage-t problem: act on the hour t+1 price and inflow from
/// post-decision level `level_post_prev` and inflow `inflow_now`, valuing the
/// outcome with stage t+1 of `approx` (or the terminal forecast when t = T-1).
/// Throws NumericalError naming the stage if the LP is infeasible.
StageSample sample_stage_value(const ReservoirSystem& system, const ValueApproximation& approx,
                               std::span<const double> level_post_prev, std::span<const double> inflow_now,
                               const StageExogenous& exo_next, std::size_t t,
                               std::optional<double> terminal_price = std::nullopt);

/// a_t <- (1 - alpha) a_t + alpha (perturbed - base) / h; NaN entries of
/// `perturbed_values` leave that component unchanged.
void update_a(ValueApproximation& approx, std::size_t t, double base_value, std::span<const double> perturbed_values,
              double alpha, double h);
/// Same smoothing for b_t from inflow-perturbed values.
void update_b(ValueApproximation& approx, std::size_t t, double base_value, std::span<const double> perturbed_values,
              double alpha, double h);
/// Moves the anchor of stage t to (level, inflow) and sets const_t so that
/// the surrogate passes through `value` there.
void set_anchor(ValueApproximation& approx, std::size_t t, double value, std::span<const double> level,
                std::span<const double> inflow);

struct TrainTrace {
  std::vector<double> v0;                // estimated start value per iteration
  std::vector<std::size_t> lp_solves;    // per iteration
  std::vector<std::size_t> sample_used;  // training path index per iteration
};

struct TrainResult {
  ValueApproximation approx;
  TrainTrace trace;
};

/// Offline training over `cfg.n_samples` iterations. Iteration n uses
/// training path order[(n-1) mod S], where `order` is a seeded permutation
/// of the S available paths (identity when S == 1).
TrainResult train_offline(const ReservoirSystem& system, const ScenarioSet& training, const TrainConfig& cfg);

struct PathOutcome {
  double v0 = 0.0;               // value estimate at the start
  double realized_profit = 0.0;  // revenue along the path plus terminal water value
  std::vector<StageDecision> decisions;
  std::vector<std::vector<double>> levels;  // post-decision level after each stage's action
};

struct Evaluation {
  std::vector<PathOutcome> paths;
  double mean_v0 = 0.0;
  double mean_realized = 0.0;
};

/// Forward pass with frozen coefficients over every path of `scenarios`.
Evaluation evaluate_online(const ReservoirSystem& system, const ValueApproximation& approx,
                           const ScenarioSet& scenarios, unsigned threads = 1);
PathOutcome evaluate_path(const ReservoirSystem& system, const ValueApproximation& approx, const SamplePath& path);

}  // namespace hydro_adp
