#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hydro_adp/lp.hpp"

namespace hydro_adp {

// Units: volumes in 10^3 m^3, flows in 10^3 m^3 per hour (one stage = one
// hour, so a flow is also the volume moved in a stage), energy in MWh.

struct ReservoirSpec {
  int id = 0;  // 1-based, as in the configuration file
  double level_min = 0.0;
  double level_max = 0.0;
  double discharge_min = 0.0;
  double discharge_max = 0.0;
  double level_initial = 0.0;
  double conversion_rate = 0.0;  // MWh per 10^3 m^3; cascade only
  double spill_max = 0.0;        // overflow without generation; 0 disables spilling
};

enum class TunnelDirection { release, pump };

struct TunnelSpec {
  int from_reservoir = 0;  // ids
  int to_reservoir = 0;
  TunnelDirection direction = TunnelDirection::release;
  double conversion_rate = 0.0;
  double flow_max = 0.0;
};

enum class SystemKind { cascade, network };

/// Immutable description of a reservoir system. Construct through
/// `make_cascade`, `make_network` or `load_system`; all of them validate.
class ReservoirSystem {
 public:
  static ReservoirSystem make_cascade(std::vector<ReservoirSpec> reservoirs,
                                      std::vector<std::pair<int, int>> downstream_upstream);
  static ReservoirSystem make_network(std::vector<ReservoirSpec> reservoirs, std::vector<TunnelSpec> tunnels,
                                      double pump_efficiency);

  SystemKind kind() const { return kind_; }
  bool is_cascade() const { return kind_ == SystemKind::cascade; }
  std::size_t num_reservoirs() const { return reservoirs_.size(); }
  std::size_t num_tunnels() const { return tunnels_.size(); }
  const std::vector<ReservoirSpec>& reservoirs() const { return reservoirs_; }
  const std::vector<TunnelSpec>& tunnels() const { return tunnels_; }
  const std::vector<std::pair<int, int>>& cascade_links() const { return links_; }
  double pump_efficiency() const { return pump_efficiency_; }

  /// Cascade connection matrix R: R(j,j) = -1, R(j,k) = 1 iff k is directly upstream of j.
  const DenseMatrix& cascade_matrix() const { return cascade_matrix_; }
  /// Release-direction incidence (J x Gamma): 1 where the tunnel releases out of reservoir j.
  const DenseMatrix& release_incidence() const { return release_incidence_; }
  /// Pump-direction incidence (J x Gamma): 1 where the tunnel pumps into reservoir j.
  const DenseMatrix& pump_incidence() const { return pump_incidence_; }
  /// Level change per unit of tunnel flow (J x Gamma), conserving water:
  /// release j->k is -1 at j, +1 at k; pump k->j is -1 at k, +eta at j.
  const DenseMatrix& network_balance() const { return network_balance_; }
  /// +1 for release tunnels, -1 for pump tunnels.
  double tunnel_sign(std::size_t tunnel) const;

  /// Per-reservoir water value (MWh per 10^3 m^3) used for the end-of-horizon
  /// valuation: the own conversion rate in a cascade, the best release
  /// conversion out of the reservoir in a network.
  std::vector<double> terminal_conversion() const;

  /// Reservoirs without an upstream neighbour (no incoming cascade link or release tunnel).
  std::vector<bool> head_reservoirs() const;

  /// Stable 64-bit FNV-1a digest of the canonical JSON form, hex encoded.
  std::string hash() const;

  std::vector<double> initial_levels() const;

 private:
  ReservoirSystem() = default;
  void validate_reservoirs() const;

  SystemKind kind_ = SystemKind::cascade;
  std::vector<ReservoirSpec> reservoirs_;
  std::vector<std::pair<int, int>> links_;
  std::vector<TunnelSpec> tunnels_;
  double pump_efficiency_ = 1.0;
  DenseMatrix cascade_matrix_;
  DenseMatrix release_incidence_;
  DenseMatrix pump_incidence_;
  DenseMatrix network_balance_;
};

/// Parses the JSON system configuration. Throws ConfigError naming the file and field.
ReservoirSystem load_system(const std::filesystem::path& path);
ReservoirSystem parse_system(const std::string& json_text, const std::string& origin = "<string>");
std::string to_json(const ReservoirSystem& system);

}  // namespace hydro_adp
