#include "hydro_adp/analysis.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hydro_adp/errors.hpp"
#include "hydro_adp/full_horizon.hpp"
#include "hydro_adp/parallel.hpp"

namespace hydro_adp {
namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError(path.string() + ": cannot open for writing");
  f << text;
  if (!f) throw ConfigError(path.string() + ": write failed");
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

ConvergenceStats convergence_stats(const TrainTrace& trace, std::size_t k) {
  if (k < 2 || k > trace.v0.size())
    throw ContractViolation("convergence_stats: k = " + std::to_string(k) + " outside [2, " +
                            std::to_string(trace.v0.size()) + "]");
  const auto first = trace.v0.end() - static_cast<std::ptrdiff_t>(k);
  ConvergenceStats s;
  for (auto it = first; it != trace.v0.end(); ++it) s.mean += *it;
  s.mean /= static_cast<double>(k);
  double ss = 0.0;
  for (auto it = first; it != trace.v0.end(); ++it) ss += (*it - s.mean) * (*it - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(k - 1));
  s.std_pct = s.mean != 0.0 ? 100.0 * s.std / std::abs(s.mean) : 0.0;
  return s;
}

WaitAndSee wait_and_see(const ReservoirSystem& system, const ScenarioSet& scenarios, unsigned threads) {
  scenarios.check_shape();
  if (scenarios.n_samples() == 0) throw ConfigError("wait-and-see needs at least one scenario");
  WaitAndSee ws;
  ws.values.resize(scenarios.n_samples());
  parallel_for(scenarios.n_samples(), threads,
               [&](std::size_t s) { ws.values[s] = solve_full_horizon(system, scenarios.path(s)).lp.value; });
  for (double v : ws.values) ws.mean += v;
  ws.mean /= static_cast<double>(ws.values.size());
  return ws;
}

double diff_pct(double in_sample, double out_sample) { return std::abs(in_sample - out_sample) / std::abs(in_sample) * 100.0; }

double gap_pct(double value, double reference) { return std::abs(value - reference) / std::abs(reference) * 100.0; }

RunArtifacts run_experiment(const ReservoirSystem& system, const ScenarioSet& train, const ScenarioSet& test,
                            const TrainConfig& cfg, std::size_t k_last, const WaitAndSee* ws, unsigned threads) {
  RunArtifacts r;
  const auto start = std::chrono::steady_clock::now();
  r.training = train_offline(system, train, cfg);
  const auto stop = std::chrono::steady_clock::now();
  r.in_sample = evaluate_online(system, r.training.approx, train, threads);
  r.out_sample = evaluate_online(system, r.training.approx, test, threads);

  r.row.sweep_samples = cfg.n_samples;
  r.row.case_label = cfg.include_inflow_term ? "I" : "E";
  r.row.in_sample = r.in_sample.mean_v0;
  r.row.out_sample = r.out_sample.mean_v0;
  r.row.diff_pct = diff_pct(r.row.in_sample, r.row.out_sample);
  if (ws) {
    r.row.ws_mean = ws->mean;
    r.row.ws_gap_pct = gap_pct(r.row.out_sample, ws->mean);
  }
  if (r.training.trace.v0.size() >= k_last && k_last >= 2)
    r.row.std_last5_pct = convergence_stats(r.training.trace, k_last).std_pct;
  r.row.runtime_s = std::chrono::duration<double>(stop - start).count();
  return r;
}

CaseComparison compare_cases(const ReservoirSystem& system, const ScenarioSet& train, const ScenarioSet& test,
                             TrainConfig cfg, std::size_t k_last, const WaitAndSee* ws, unsigned threads) {
  CaseComparison c;
  cfg.include_inflow_term = false;
  c.excluded = run_experiment(system, train, test, cfg, k_last, ws, threads);
  cfg.include_inflow_term = true;
  c.included = run_experiment(system, train, test, cfg, k_last, ws, threads);
  const double e = c.excluded.row.out_sample;
  c.improvement_pct = (c.included.row.out_sample - e) / std::abs(e) * 100.0;
  return c;
}

Crosscheck deterministic_crosscheck(const ReservoirSystem& system, const std::vector<SamplePath>& paths,
                                    std::size_t iterations, TrainConfig cfg) {
  if (iterations < 1) throw ConfigError("crosscheck needs at least one iteration");
  if (paths.empty()) throw ConfigError("crosscheck needs at least one path");
  cfg.n_samples = iterations;
  Crosscheck out;
  for (const auto& path : paths) {
    ScenarioSet single;
    single.horizon = path.horizon();
    single.prices = {path.prices};
    single.inflows = {path.inflows};
    single.terminal_prices = {path.terminal_price};
    CrosscheckPoint p;
    p.adp_value = train_offline(system, single, cfg).trace.v0.back();
    p.lp_value = solve_full_horizon(system, path).lp.value;
    p.rel_gap = std::abs(p.adp_value - p.lp_value) / std::abs(p.lp_value);
    out.mean_rel_gap += p.rel_gap;
    out.points.push_back(p);
  }
  out.mean_rel_gap /= static_cast<double>(out.points.size());
  return out;
}

std::uint64_t training_seed(std::uint64_t seed) { return mix(seed, 1); }
std::uint64_t test_seed(std::uint64_t seed) { return mix(seed, 2); }

RunReport sweep(const ReservoirSystem& system, const SweepOptions& options, TrainConfig cfg) {
  const ScenarioModel model = default_scenario_model(system);
  const ScenarioSet test = simulate(model, options.horizon, options.n_test, test_seed(options.seed), ScenarioRole::test);
  const WaitAndSee ws = wait_and_see(system, test, options.threads);
  RunReport report;
  for (std::size_t count : options.counts) {
    const ScenarioSet train =
        simulate(model, options.horizon, count, training_seed(options.seed), ScenarioRole::training);
    cfg.n_samples = count;
    report.rows.push_back(run_experiment(system, train, test, cfg, options.k_last, &ws, options.threads).row);
  }
  return report;
}

std::string format_report(const RunReport& report) {
  std::ostringstream os;
  os << report_header << '\n';
  for (const auto& r : report.rows)
    os << r.sweep_samples << ',' << r.case_label << ',' << fmt(r.in_sample) << ',' << fmt(r.out_sample) << ','
       << fmt(r.diff_pct) << ',' << fmt(r.ws_mean) << ',' << fmt(r.ws_gap_pct) << ',' << fmt(r.std_last5_pct) << ','
       << fmt(r.runtime_s) << '\n';
  return os.str();
}

void emit_report(const RunReport& report, const std::filesystem::path& path) { write_text(path, format_report(report)); }

RunReport parse_report(const std::string& text, const std::string& origin) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != report_header) throw ParseError(origin + ": row 1: unexpected report header");
  RunReport report;
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 9) throw ParseError(origin + ": row " + std::to_string(row) + ": expected 9 columns");
    auto num = [&](std::size_t c) {
      char* end = nullptr;
      const double v = std::strtod(cells[c].c_str(), &end);
      if (cells[c].empty() || *end != '\0')
        throw ParseError(origin + ": row " + std::to_string(row) + ", column " + std::to_string(c + 1) + ": not a number");
      return v;
    };
    ReportRow r;
    r.sweep_samples = static_cast<std::size_t>(num(0));
    r.case_label = cells[1];
    r.in_sample = num(2);
    r.out_sample = num(3);
    r.diff_pct = num(4);
    r.ws_mean = num(5);
    r.ws_gap_pct = num(6);
    r.std_last5_pct = num(7);
    r.runtime_s = num(8);
    report.rows.push_back(r);
  }
  return report;
}

void write_trace_csv(const TrainTrace& trace, const std::filesystem::path& path) {
  std::ostringstream os;
  os << "iteration,sample,v0,lp_solves\n";
  for (std::size_t n = 0; n < trace.v0.size(); ++n)
    os << n + 1 << ',' << trace.sample_used[n] << ',' << fmt(trace.v0[n]) << ',' << trace.lp_solves[n] << '\n';
  write_text(path, os.str());
}

void write_trajectory_csv(const ReservoirSystem& system, const ScenarioSet& scenarios, const Evaluation& evaluation,
                          const std::filesystem::path& path) {
  const bool cascade = system.is_cascade();
  const std::size_t na = cascade ? system.num_reservoirs() : system.num_tunnels();
  std::ostringstream os;
  os << "sample,t,price";
  for (std::size_t k = 0; k < na; ++k) os << (cascade ? ",discharge_" : ",flow_") << k + 1;
  for (std::size_t j = 0; j < system.num_reservoirs(); ++j) os << ",spill_" << j + 1;
  for (std::size_t j = 0; j < system.num_reservoirs(); ++j) os << ",level_" << j + 1;
  os << '\n';
  for (std::size_t s = 0; s < evaluation.paths.size(); ++s) {
    const auto& p = evaluation.paths[s];
    for (std::size_t t = 0; t < p.decisions.size(); ++t) {
      os << s << ',' << t + 1 << ',' << fmt(scenarios.prices[s][t]);
      const auto& d = p.decisions[t];
      for (double v : cascade ? d.discharge : d.flow) os << ',' << fmt(v);
      for (double v : d.spill) os << ',' << fmt(v);
      for (double v : p.levels[t]) os << ',' << fmt(v);
      os << '\n';
    }
  }
  write_text(path, os.str());
}

void write_evaluation_csv(const Evaluation& evaluation, const WaitAndSee* ws, const std::filesystem::path& path) {
  std::ostringstream os;
  os << "sample,v0,realized_profit" << (ws ? ",wait_and_see" : "") << '\n';
  for (std::size_t s = 0; s < evaluation.paths.size(); ++s) {
    os << s << ',' << fmt(evaluation.paths[s].v0) << ',' << fmt(evaluation.paths[s].realized_profit);
    if (ws) os << ',' << fmt(ws->values.at(s));
    os << '\n';
  }
  write_text(path, os.str());
}

}  // namespace hydro_adp
