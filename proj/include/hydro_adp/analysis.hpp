#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hydro_adp/adp.hpp"
#include "hydro_adp/scenarios.hpp"
#include "hydro_adp/system.hpp"

namespace hydro_adp {

struct ConvergenceStats {
  double std = 0.0;  // sample standard deviation (n - 1)
  double mean = 0.0;
  double std_pct = 0.0;  // 100 * std / |mean|
};

/// Statistics of the last k start-value estimates. Requires 2 <= k <= trace length.
ConvergenceStats convergence_stats(const TrainTrace& trace, std::size_t k);

struct WaitAndSee {
  std::vector<double> values;  // per-sample perfect-foresight optimum
  double mean = 0.0;
};

WaitAndSee wait_and_see(const ReservoirSystem& system, const ScenarioSet& scenarios, unsigned threads = 1);

/// One row of a report; one row per sweep point and case.
struct ReportRow {
  std::size_t sweep_samples = 0;
  std::string case_label;  // "E" or "I"
  double in_sample = 0.0;
  double out_sample = 0.0;
  double diff_pct = 0.0;
  double ws_mean = 0.0;
  double ws_gap_pct = 0.0;
  double std_last5_pct = 0.0;
  double runtime_s = 0.0;
};

struct RunReport {
  std::vector<ReportRow> rows;
};

/// Everything produced by one train + evaluate run.
struct RunArtifacts {
  TrainResult training;
  Evaluation in_sample;
  Evaluation out_sample;
  ReportRow row;
};

/// Trains on `train` (cfg.n_samples iterations), evaluates on both sets and
/// fills a row. `ws` may be null, in which case the wait-and-see columns stay 0.
RunArtifacts run_experiment(const ReservoirSystem& system, const ScenarioSet& train, const ScenarioSet& test,
                            const TrainConfig& cfg, std::size_t k_last, const WaitAndSee* ws, unsigned threads = 1);

double diff_pct(double in_sample, double out_sample);
double gap_pct(double value, double reference);

struct CaseComparison {
  RunArtifacts excluded;
  RunArtifacts included;
  double improvement_pct = 0.0;  // (I - E) / E * 100 on out-of-sample means
};

/// Runs the same configuration with and without the inflow term.
CaseComparison compare_cases(const ReservoirSystem& system, const ScenarioSet& train, const ScenarioSet& test,
                             TrainConfig cfg, std::size_t k_last, const WaitAndSee* ws, unsigned threads = 1);

struct CrosscheckPoint {
  double adp_value = 0.0;
  double lp_value = 0.0;
  double rel_gap = 0.0;  // |adp - lp| / |lp|
};

struct Crosscheck {
  std::vector<CrosscheckPoint> points;
  double mean_rel_gap = 0.0;
};

/// Trains on each single path repeated `iterations` times and compares the
/// final start-value estimate with the path's perfect-foresight optimum.
Crosscheck deterministic_crosscheck(const ReservoirSystem& system, const std::vector<SamplePath>& paths,
                                    std::size_t iterations, TrainConfig cfg);

struct SweepOptions {
  std::vector<std::size_t> counts{200, 1000, 2000, 3000, 4000, 5000};
  std::size_t n_test = 1000;
  std::size_t horizon = 48;
  std::size_t k_last = 5;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// For every count: train on that many fresh training paths, evaluate in and
/// out of sample, with wait-and-see computed once on the shared test set.
RunReport sweep(const ReservoirSystem& system, const SweepOptions& options, TrainConfig cfg);

/// Independent seeds for the training and test scenario sets.
std::uint64_t training_seed(std::uint64_t seed);
std::uint64_t test_seed(std::uint64_t seed);

inline constexpr const char* report_header =
    "sweep_samples,case,in_sample,out_sample,diff_pct,ws_mean,ws_gap_pct,std_last5_pct,runtime_s";

std::string format_report(const RunReport& report);
void emit_report(const RunReport& report, const std::filesystem::path& path);
RunReport parse_report(const std::string& text, const std::string& origin = "<string>");

/// Per-iteration trace: `iteration,sample,v0,lp_solves`.
void write_trace_csv(const TrainTrace& trace, const std::filesystem::path& path);
/// Per-sample, per-stage trajectory: `sample,t,price,action_*,level_*`.
void write_trajectory_csv(const ReservoirSystem& system, const ScenarioSet& scenarios, const Evaluation& evaluation,
                          const std::filesystem::path& path);
/// Per-sample results: `sample,v0,realized_profit[,ws]`.
void write_evaluation_csv(const Evaluation& evaluation, const WaitAndSee* ws, const std::filesystem::path& path);

}  // namespace hydro_adp
