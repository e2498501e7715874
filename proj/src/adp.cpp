#include "hydro_adp/adp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "hydro_adp/errors.hpp"
#include "hydro_adp/parallel.hpp"

namespace hydro_adp {
namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

void expect_stage(const ValueApproximation& approx, std::size_t t) {
  if (t >= approx.horizon)
    throw ContractViolation("stage " + std::to_string(t) + " outside horizon " + std::to_string(approx.horizon));
}

LpProblem stage_problem(const ReservoirSystem& system, const ValueApproximation& approx,
                        std::span<const double> level_post_prev, std::span<const double> inflow_now,
                        const StageExogenous& exo_next, std::size_t t, std::optional<double> terminal_price) {
  expect_stage(approx, t);
  if (t + 1 == approx.horizon) {
    if (!terminal_price) throw ContractViolation("last stage needs the terminal price forecast");
    return build_stage_lp(system, level_post_prev, inflow_now, exo_next, {}, 0.0, terminal_price);
  }
  const std::size_t next = t + 1;
  double c = approx.constant[next];
  if (approx.config.include_inflow_term) c += dot(approx.b[next], exo_next.inflows);
  return build_stage_lp(system, level_post_prev, inflow_now, exo_next, approx.a[next], c);
}

void smooth(std::vector<double>& coef, double base_value, std::span<const double> perturbed, double alpha, double h) {
  if (perturbed.size() != coef.size())
    throw ContractViolation("perturbed values: expected " + std::to_string(coef.size()) + " entries");
  if (!(h > 0.0)) throw ContractViolation("finite-difference step must be positive");
  for (std::size_t j = 0; j < coef.size(); ++j) {
    if (std::isnan(perturbed[j])) continue;
    coef[j] = (1.0 - alpha) * coef[j] + alpha * (perturbed[j] - base_value) / h;
  }
}

std::vector<std::size_t> training_order(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x6f726465u};
  std::mt19937_64 rng(seq);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

json vectors(const std::vector<std::vector<double>>& v) { return json(v); }

}  // namespace

void TrainConfig::validate() const {
  if (n_samples < 1) throw ConfigError("n_samples must be at least 1");
  if (!(alpha_initial > 0.0 && alpha_initial <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
  if (!(alpha_damping > 0.0)) throw ConfigError("alpha damping must be positive");
  if (!(fd_step > 0.0)) throw ConfigError("fd_step must be positive");
}

double TrainConfig::alpha(std::size_t n) const {
  return alpha_initial * alpha_damping / (alpha_damping + static_cast<double>(n) - 1.0);
}

ValueApproximation ValueApproximation::initial(const ReservoirSystem& system, std::size_t horizon,
                                               const TrainConfig& cfg) {
  if (horizon < 1) throw ConfigError("horizon must be at least 1");
  const std::size_t n = system.num_reservoirs();
  ValueApproximation v;
  v.horizon = horizon;
  v.system_hash = system.hash();
  v.config = cfg;
  v.a.assign(horizon, std::vector<double>(n, 0.0));
  v.b = v.a;
  v.constant.assign(horizon, 0.0);
  v.anchor_level.assign(horizon, system.initial_levels());
  v.anchor_inflow.assign(horizon, std::vector<double>(n, 0.0));
  return v;
}

double ValueApproximation::value(std::size_t t, std::span<const double> level, std::span<const double> inflow) const {
  expect_stage(*this, t);
  double v = constant[t] + dot(a[t], level);
  if (config.include_inflow_term) v += dot(b[t], inflow);
  return v;
}

void ValueApproximation::check_shape() const {
  const std::size_t n = num_reservoirs();
  auto ok = [&](const std::vector<std::vector<double>>& m) {
    return m.size() == horizon && std::ranges::all_of(m, [&](const auto& r) { return r.size() == n; });
  };
  if (!ok(a) || !ok(b) || !ok(anchor_level) || !ok(anchor_inflow) || constant.size() != horizon)
    throw ContractViolation("value approximation arrays do not match horizon and reservoir count");
  auto finite = [](const std::vector<std::vector<double>>& m) {
    return std::ranges::all_of(m, [](const auto& r) { return std::ranges::all_of(r, [](double x) { return std::isfinite(x); }); });
  };
  if (!finite(a) || !finite(b) || !finite(anchor_level) || !finite(anchor_inflow) ||
      !std::ranges::all_of(constant, [](double x) { return std::isfinite(x); }))
    throw ContractViolation("value approximation has non-finite entries");
}

std::string to_json(const ValueApproximation& approx) {
  approx.check_shape();
  json j;
  j["horizon"] = approx.horizon;
  j["system_hash"] = approx.system_hash;
  j["config"] = {{"n_samples", approx.config.n_samples},
                 {"alpha_initial", approx.config.alpha_initial},
                 {"alpha_damping", approx.config.alpha_damping},
                 {"fd_step", approx.config.fd_step},
                 {"include_inflow_term", approx.config.include_inflow_term},
                 {"freeze_inflow_term", approx.config.freeze_inflow_term},
                 {"seed", approx.config.seed}};
  j["a"] = vectors(approx.a);
  j["b"] = vectors(approx.b);
  j["const"] = approx.constant;
  j["anchor_level"] = vectors(approx.anchor_level);
  j["anchor_inflow"] = vectors(approx.anchor_inflow);
  return j.dump(1);
}

ValueApproximation parse_value_approximation(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin + ": " + e.what());
  }
  ValueApproximation v;
  std::string field;
  try {
    field = "horizon";
    v.horizon = j.at(field).get<std::size_t>();
    field = "system_hash";
    v.system_hash = j.at(field).get<std::string>();
    const json& c = j.at("config");
    field = "config.n_samples";
    v.config.n_samples = c.at("n_samples").get<std::size_t>();
    field = "config.alpha_initial";
    v.config.alpha_initial = c.at("alpha_initial").get<double>();
    field = "config.alpha_damping";
    v.config.alpha_damping = c.at("alpha_damping").get<double>();
    field = "config.fd_step";
    v.config.fd_step = c.at("fd_step").get<double>();
    field = "config.include_inflow_term";
    v.config.include_inflow_term = c.at("include_inflow_term").get<bool>();
    field = "config.freeze_inflow_term";
    v.config.freeze_inflow_term = c.value("freeze_inflow_term", false);
    field = "config.seed";
    v.config.seed = c.at("seed").get<std::uint64_t>();
    field = "a";
    v.a = j.at(field).get<std::vector<std::vector<double>>>();
    field = "b";
    v.b = j.at(field).get<std::vector<std::vector<double>>>();
    field = "const";
    v.constant = j.at(field).get<std::vector<double>>();
    field = "anchor_level";
    v.anchor_level = j.at(field).get<std::vector<std::vector<double>>>();
    field = "anchor_inflow";
    v.anchor_inflow = j.at(field).get<std::vector<std::vector<double>>>();
  } catch (const json::exception& e) {
    throw ParseError(origin + ": field '" + field + "': " + e.what());
  }
  try {
    v.check_shape();
  } catch (const ContractViolation& e) {
    throw ParseError(origin + ": " + e.what());
  }
  return v;
}

void save_value_approximation(const ValueApproximation& approx, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError(path.string() + ": cannot open for writing");
  f << to_json(approx) << '\n';
  if (!f) throw ConfigError(path.string() + ": write failed");
}

ValueApproximation load_value_approximation(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ParseError(path.string() + ": cannot open");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_value_approximation(ss.str(), path.string());
}

StageSample sample_stage_value(const ReservoirSystem& system, const ValueApproximation& approx,
                               std::span<const double> level_post_prev, std::span<const double> inflow_now,
                               const StageExogenous& exo_next, std::size_t t, std::optional<double> terminal_price) {
  const LpProblem p = stage_problem(system, approx, level_post_prev, inflow_now, exo_next, t, terminal_price);
  StageSample s;
  s.lp = solve(p);
  if (!s.lp.optimal()) throw NumericalError("stage " + std::to_string(t) + ": stage LP is infeasible");
  s.value = s.lp.value;
  s.decision = decision_from_lp(system, s.lp.x);
  s.level_post_next = advance_level(system, level_post_prev, inflow_now, s.decision);
  return s;
}

void update_a(ValueApproximation& approx, std::size_t t, double base_value, std::span<const double> perturbed_values,
              double alpha, double h) {
  expect_stage(approx, t);
  smooth(approx.a[t], base_value, perturbed_values, alpha, h);
}

void update_b(ValueApproximation& approx, std::size_t t, double base_value, std::span<const double> perturbed_values,
              double alpha, double h) {
  expect_stage(approx, t);
  smooth(approx.b[t], base_value, perturbed_values, alpha, h);
}

void set_anchor(ValueApproximation& approx, std::size_t t, double value, std::span<const double> level,
                std::span<const double> inflow) {
  expect_stage(approx, t);
  approx.anchor_level[t].assign(level.begin(), level.end());
  approx.anchor_inflow[t].assign(inflow.begin(), inflow.end());
  approx.constant[t] = value - dot(approx.a[t], level) - dot(approx.b[t], inflow);
}

TrainResult train_offline(const ReservoirSystem& system, const ScenarioSet& training, const TrainConfig& cfg) {
  cfg.validate();
  training.check_shape();
  if (training.n_samples() == 0) throw ConfigError("training set is empty");
  if (training.num_reservoirs() != system.num_reservoirs())
    throw ConfigError("training set has " + std::to_string(training.num_reservoirs()) + " inflow series, system has " +
                      std::to_string(system.num_reservoirs()) + " reservoirs");

  const std::size_t horizon = training.horizon;
  const std::size_t nj = system.num_reservoirs();
  const double h = cfg.fd_step;
  TrainResult r{ValueApproximation::initial(system, horizon, cfg), {}};
  ValueApproximation& approx = r.approx;
  const auto order = training_order(training.n_samples(), cfg.seed);

  for (std::size_t n = 1; n <= cfg.n_samples; ++n) {
    const std::size_t sample = order[(n - 1) % order.size()];
    const SamplePath path = training.path(sample);
    const double alpha = cfg.alpha(n);
    std::size_t solves = 0;
    double v0 = 0.0;

    std::vector<double> level = system.initial_levels();
    std::vector<double> inflow(nj, 0.0);
    for (std::size_t t = 0; t < horizon; ++t) {
      const StageExogenous exo = path.stage(t);
      const std::optional<double> terminal =
          t + 1 == horizon ? std::optional<double>(path.terminal_price) : std::nullopt;
      const StageSample base = sample_stage_value(system, approx, level, inflow, exo, t, terminal);
      ++solves;
      if (t == 0) v0 = base.value;

      // Forward difference; mirrored backward difference if the forward LP is infeasible.
      auto perturbed = [&](std::vector<double>& x, std::size_t j) {
        const double saved = x[j];
        double out = kNaN;
        for (double sign : {1.0, -1.0}) {
          x[j] = saved + sign * h;
          const LpSolution s = solve(stage_problem(system, approx, level, inflow, exo, t, terminal));
          ++solves;
          if (s.optimal()) {
            out = sign > 0 ? s.value : 2.0 * base.value - s.value;
            break;
          }
        }
        x[j] = saved;
        return out;
      };

      std::vector<double> level_values(nj), inflow_values(nj, kNaN);
      for (std::size_t j = 0; j < nj; ++j) level_values[j] = perturbed(level, j);
      if (!cfg.freeze_inflow_term)
        for (std::size_t j = 0; j < nj; ++j) inflow_values[j] = perturbed(inflow, j);

      update_a(approx, t, base.value, level_values, alpha, h);
      update_b(approx, t, base.value, inflow_values, alpha, h);
      set_anchor(approx, t, base.value, level, inflow);

      level = base.level_post_next;
      inflow = exo.inflows;
    }
    r.trace.v0.push_back(v0);
    r.trace.lp_solves.push_back(solves);
    r.trace.sample_used.push_back(sample);
  }
  return r;
}

PathOutcome evaluate_path(const ReservoirSystem& system, const ValueApproximation& approx, const SamplePath& path) {
  if (path.horizon() != approx.horizon)
    throw ContractViolation("scenario horizon " + std::to_string(path.horizon()) + " does not match approximation horizon " +
                            std::to_string(approx.horizon));
  const std::size_t nj = system.num_reservoirs();
  PathOutcome out;
  std::vector<double> level = system.initial_levels();
  std::vector<double> inflow(nj, 0.0);
  for (std::size_t t = 0; t < approx.horizon; ++t) {
    const StageExogenous exo = path.stage(t);
    const std::optional<double> terminal =
        t + 1 == approx.horizon ? std::optional<double>(path.terminal_price) : std::nullopt;
    StageSample s = sample_stage_value(system, approx, level, inflow, exo, t, terminal);
    if (t == 0) out.v0 = s.value;
    out.realized_profit += stage_profit(system, exo, s.decision);
    level = std::move(s.level_post_next);
    inflow = exo.inflows;
    out.decisions.push_back(std::move(s.decision));
    out.levels.push_back(level);
  }
  const auto g = system.terminal_conversion();
  for (std::size_t j = 0; j < nj; ++j) out.realized_profit += path.terminal_price * g[j] * (level[j] + inflow[j]);
  return out;
}

Evaluation evaluate_online(const ReservoirSystem& system, const ValueApproximation& approx,
                           const ScenarioSet& scenarios, unsigned threads) {
  scenarios.check_shape();
  approx.check_shape();
  if (scenarios.horizon != approx.horizon)
    throw ContractViolation("scenario horizon " + std::to_string(scenarios.horizon) +
                            " does not match approximation horizon " + std::to_string(approx.horizon));
  if (approx.num_reservoirs() != system.num_reservoirs())
    throw ContractViolation("approximation was trained for a different reservoir count");
  Evaluation e;
  e.paths.resize(scenarios.n_samples());
  parallel_for(scenarios.n_samples(), threads,
               [&](std::size_t s) { e.paths[s] = evaluate_path(system, approx, scenarios.path(s)); });
  for (const auto& p : e.paths) {
    e.mean_v0 += p.v0;
    e.mean_realized += p.realized_profit;
  }
  if (!e.paths.empty()) {
    e.mean_v0 /= static_cast<double>(e.paths.size());
    e.mean_realized /= static_cast<double>(e.paths.size());
  }
  return e;
}

}  // namespace hydro_adp
