#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hydro_adp/arma.hpp"
#include "hydro_adp/hydro_model.hpp"
#include "hydro_adp/system.hpp"

namespace hydro_adp {

struct NoiseModel {
  double price_std = 0.0;
  std::vector<double> inflow_stds;
  std::vector<std::vector<double>> inflow_corr;  // symmetric, unit diagonal
};

/// Lower-triangular L with L L^T = corr (zero pivots allowed). Throws
/// ConfigError unless corr is symmetric, unit-diagonal and positive semidefinite.
std::vector<std::vector<double>> correlation_factor(const std::vector<std::vector<double>>& corr);

enum class ScenarioRole { training, test };
const char* to_string(ScenarioRole role);

struct ScenarioSet {
  std::size_t horizon = 0;
  std::uint64_t seed = 0;
  ScenarioRole role = ScenarioRole::training;
  std::vector<std::vector<double>> prices;                // [sample][t]
  std::vector<std::vector<std::vector<double>>> inflows;  // [sample][t][reservoir]
  std::vector<double> terminal_prices;                    // one-step price forecast past the horizon

  std::size_t n_samples() const { return prices.size(); }
  std::size_t num_reservoirs() const { return inflows.empty() || inflows[0].empty() ? 0 : inflows[0][0].size(); }
  SamplePath path(std::size_t sample) const;
  /// Throws ContractViolation unless all arrays agree with horizon and n_samples.
  void check_shape() const;
};

/// Hours simulated and discarded before t = 1 so that the weekly lag has history.
inline constexpr std::size_t burn_in_hours = 3 * 168;

/// Simulates n_samples paths. Each sample draws from its own substream
/// derived from (seed, sample), so results do not depend on evaluation order.
/// Inflows are clamped at zero; prices are not. Noise stds come from `noise`.
ScenarioSet simulate(const ArmaSpec& price_spec, const std::vector<ArmaSpec>& inflow_specs, const NoiseModel& noise,
                     std::size_t horizon, std::size_t n_samples, std::uint64_t seed,
                     ScenarioRole role = ScenarioRole::training);

/// Price and inflow models for a system: head reservoirs get the upstream
/// inflow model, the rest the downstream one, each scaled by
/// level_max / shipped::reference_capacity for networks.
struct ScenarioModel {
  ArmaSpec price;
  std::vector<ArmaSpec> inflows;
  NoiseModel noise;
};
ScenarioModel default_scenario_model(const ReservoirSystem& system);

ScenarioSet simulate(const ScenarioModel& model, std::size_t horizon, std::size_t n_samples, std::uint64_t seed,
                     ScenarioRole role = ScenarioRole::training);

/// CSV: '#' metadata lines, then `sample,t,price,inflow_1,...,inflow_J`.
void save_scenarios(const ScenarioSet& set, const std::filesystem::path& path);
ScenarioSet load_scenarios(const std::filesystem::path& path);
std::string format_scenarios(const ScenarioSet& set);
ScenarioSet parse_scenarios(const std::string& text, const std::string& origin = "<string>");

}  // namespace hydro_adp
