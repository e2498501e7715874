// hydro-adp: scenario generation, training, evaluation and reports.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hydro_adp/adp.hpp"
#include "hydro_adp/analysis.hpp"
#include "hydro_adp/errors.hpp"
#include "hydro_adp/scenarios.hpp"
#include "hydro_adp/system.hpp"

namespace fs = std::filesystem;
using namespace hydro_adp;

namespace {

struct RunConfig {
  std::string system_path;
  std::string command;
  std::size_t horizon = 48;
  std::size_t n_train = 1000;
  std::size_t n_test = 1000;
  double alpha = 0.5;
  double alpha_damping = 100.0;
  double fd_step = 1.0;
  std::uint64_t seed = 0;
  bool exclude_inflow_term = false;
  std::string out;
  std::size_t k_last = 5;
  unsigned threads = 1;
  std::vector<std::size_t> counts{200, 1000, 2000, 3000, 4000, 5000};
};

TrainConfig train_config(const RunConfig& rc) {
  TrainConfig c;
  c.n_samples = rc.n_train;
  c.alpha_initial = rc.alpha;
  c.alpha_damping = rc.alpha_damping;
  c.fd_step = rc.fd_step;
  c.include_inflow_term = !rc.exclude_inflow_term;
  c.seed = rc.seed;
  c.validate();
  return c;
}

// Scenario sets come from `generate` output when present, else are simulated
// from the same seeds so both routes agree.
ScenarioSet scenarios(const ReservoirSystem& system, const RunConfig& rc, ScenarioRole role) {
  const fs::path file = fs::path(rc.out) / (role == ScenarioRole::training ? "train.csv" : "test.csv");
  const std::size_t n = role == ScenarioRole::training ? rc.n_train : rc.n_test;
  if (fs::exists(file)) {
    ScenarioSet s = load_scenarios(file);
    if (s.horizon != rc.horizon) throw ConfigError(file.string() + ": horizon " + std::to_string(s.horizon) +
                                                   " does not match --horizon " + std::to_string(rc.horizon));
    if (s.n_samples() < n) throw ConfigError(file.string() + ": holds " + std::to_string(s.n_samples()) +
                                             " samples, " + std::to_string(n) + " requested");
    s.prices.resize(n);
    s.inflows.resize(n);
    s.terminal_prices.resize(n);
    return s;
  }
  const std::uint64_t seed = role == ScenarioRole::training ? training_seed(rc.seed) : test_seed(rc.seed);
  return simulate(default_scenario_model(system), rc.horizon, n, seed, role);
}

void write_manifest(const RunConfig& rc, const ReservoirSystem& system) {
  nlohmann::json j{{"command", rc.command},
                   {"system", rc.system_path},
                   {"system_hash", system.hash()},
                   {"horizon", rc.horizon},
                   {"n_train", rc.n_train},
                   {"n_test", rc.n_test},
                   {"alpha", rc.alpha},
                   {"alpha_damping", rc.alpha_damping},
                   {"fd_step", rc.fd_step},
                   {"seed", rc.seed},
                   {"training_seed", training_seed(rc.seed)},
                   {"test_seed", test_seed(rc.seed)},
                   {"include_inflow_term", !rc.exclude_inflow_term},
                   {"k_last", rc.k_last}};
  std::ofstream(fs::path(rc.out) / ("run_" + rc.command + ".json")) << j.dump(2) << '\n';
}

int run(const RunConfig& rc) {
  const ReservoirSystem system = load_system(rc.system_path);
  if (rc.horizon < 1) throw ConfigError("--horizon must be at least 1");
  fs::create_directories(rc.out);
  write_manifest(rc, system);
  const fs::path out(rc.out);

  if (rc.command == "generate") {
    const ScenarioModel model = default_scenario_model(system);
    save_scenarios(simulate(model, rc.horizon, rc.n_train, training_seed(rc.seed), ScenarioRole::training),
                   out / "train.csv");
    save_scenarios(simulate(model, rc.horizon, rc.n_test, test_seed(rc.seed), ScenarioRole::test), out / "test.csv");
  } else if (rc.command == "train") {
    const TrainResult r = train_offline(system, scenarios(system, rc, ScenarioRole::training), train_config(rc));
    save_value_approximation(r.approx, out / "approximation.json");
    write_trace_csv(r.trace, out / "trace.csv");
  } else if (rc.command == "evaluate") {
    const fs::path file = out / "approximation.json";
    if (!fs::exists(file)) throw ConfigError(file.string() + ": not found; run --command train first");
    const ValueApproximation approx = load_value_approximation(file);
    if (approx.system_hash != system.hash())
      throw ConfigError(file.string() + ": trained for a different system (hash " + approx.system_hash + ")");
    const ScenarioSet test = scenarios(system, rc, ScenarioRole::test);
    const Evaluation e = evaluate_online(system, approx, test, rc.threads);
    write_evaluation_csv(e, nullptr, out / "evaluation.csv");
    write_trajectory_csv(system, test, e, out / "trajectories.csv");
    std::cout << "out-of-sample mean start value " << e.mean_v0 << ", mean realized profit " << e.mean_realized
              << '\n';
  } else if (rc.command == "waitandsee") {
    const ScenarioSet test = scenarios(system, rc, ScenarioRole::test);
    const WaitAndSee ws = wait_and_see(system, test, rc.threads);
    std::ofstream f(out / "waitandsee.csv");
    f << "sample,wait_and_see\n";
    f.precision(17);
    for (std::size_t s = 0; s < ws.values.size(); ++s) f << s << ',' << ws.values[s] << '\n';
    std::cout << "wait-and-see mean " << ws.mean << '\n';
  } else if (rc.command == "detcheck") {
    const ScenarioSet test = scenarios(system, rc, ScenarioRole::test);
    std::vector<SamplePath> paths;
    for (std::size_t s = 0; s < test.n_samples(); ++s) paths.push_back(test.path(s));
    const Crosscheck c = deterministic_crosscheck(system, paths, rc.n_train, train_config(rc));
    std::ofstream f(out / "detcheck.csv");
    f << "sample,adp_value,lp_value,rel_gap\n";
    f.precision(17);
    for (std::size_t s = 0; s < c.points.size(); ++s)
      f << s << ',' << c.points[s].adp_value << ',' << c.points[s].lp_value << ',' << c.points[s].rel_gap << '\n';
    std::cout << "mean relative gap " << c.mean_rel_gap * 100.0 << "%\n";
  } else if (rc.command == "compare-ei") {
    const ScenarioSet train = scenarios(system, rc, ScenarioRole::training);
    const ScenarioSet test = scenarios(system, rc, ScenarioRole::test);
    const WaitAndSee ws = wait_and_see(system, test, rc.threads);
    const CaseComparison c = compare_cases(system, train, test, train_config(rc), rc.k_last, &ws, rc.threads);
    emit_report({{c.excluded.row, c.included.row}}, out / "compare_ei.csv");
    std::cout << "case I improves the out-of-sample estimate by " << c.improvement_pct << "%\n";
  } else if (rc.command == "sweep") {
    SweepOptions o;
    o.counts = rc.counts;
    o.n_test = rc.n_test;
    o.horizon = rc.horizon;
    o.k_last = rc.k_last;
    o.seed = rc.seed;
    o.threads = rc.threads;
    emit_report(sweep(system, o, train_config(rc)), out / "sweep.csv");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Approximate dynamic programming for connected hydro reservoirs"};
  RunConfig rc;
  app.add_option("--system", rc.system_path, "System configuration JSON")->required();
  app.add_option("--command", rc.command, "What to run")
      ->required()
      ->check(CLI::IsMember({"generate", "train", "evaluate", "waitandsee", "detcheck", "compare-ei", "sweep"}));
  app.add_option("--horizon", rc.horizon, "Hours per scenario")->capture_default_str();
  app.add_option("--n-train", rc.n_train, "Training samples (iterations per path for detcheck)")->capture_default_str();
  app.add_option("--n-test", rc.n_test, "Test samples (paths for detcheck)")->capture_default_str();
  app.add_option("--alpha", rc.alpha, "Initial learning rate")->capture_default_str();
  app.add_option("--alpha-damping", rc.alpha_damping, "Learning-rate damping n0")->capture_default_str();
  app.add_option("--fd-step", rc.fd_step, "Finite-difference step (10^3 m^3)")->capture_default_str();
  app.add_option("--seed", rc.seed, "Top-level random seed")->capture_default_str();
  app.add_flag("--exclude-inflow-term", rc.exclude_inflow_term, "Drop the inflow term (case E)");
  app.add_option("--out", rc.out, "Output directory (default: $HYDRO_ADP_OUT, else .)");
  app.add_option("--k-last", rc.k_last, "Iterates used for convergence statistics")->capture_default_str();
  app.add_option("--threads", rc.threads, "Worker threads for evaluation and wait-and-see")->capture_default_str();
  app.add_option("--counts", rc.counts, "Sample counts for sweep")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  if (rc.out.empty()) {
    const char* env = std::getenv("HYDRO_ADP_OUT");
    rc.out = env && *env ? env : ".";
  }

  try {
    return run(rc);
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 1;
  } catch (const ContractViolation& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
