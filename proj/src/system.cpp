#include "hydro_adp/system.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hydro_adp/errors.hpp"

namespace hydro_adp {
namespace {

using nlohmann::json;

std::string reservoir_label(const ReservoirSpec& r) { return "reservoir " + std::to_string(r.id); }

std::size_t index_of(const std::vector<ReservoirSpec>& rs, int id, const std::string& what) {
  for (std::size_t j = 0; j < rs.size(); ++j)
    if (rs[j].id == id) return j;
  throw ConfigError(what + ": unknown reservoir id " + std::to_string(id));
}

class FieldReader {
 public:
  FieldReader(const json& node, std::string path, const std::string& origin)
      : node_(node), path_(std::move(path)), origin_(origin) {}

  const json& at(const std::string& key) const {
    if (!node_.is_object() || !node_.contains(key)) fail(key, "missing");
    return node_.at(key);
  }

  double number(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_number()) fail(key, "expected a number");
    return v.get<double>();
  }

  double number_or(const std::string& key, double fallback) const {
    if (!node_.contains(key)) return fallback;
    return number(key);
  }

  int integer(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_number_integer()) fail(key, "expected an integer");
    return v.get<int>();
  }

  std::string string(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }

  [[noreturn]] void fail(const std::string& key, const std::string& why) const {
    throw ConfigError(origin_ + ": field '" + path_ + (path_.empty() ? "" : ".") + key + "': " + why);
  }

 private:
  const json& node_;
  std::string path_;
  const std::string& origin_;
};

}  // namespace

void ReservoirSystem::validate_reservoirs() const {
  if (reservoirs_.empty()) throw ConfigError("system has no reservoirs");
  std::set<int> ids;
  for (const auto& r : reservoirs_) {
    if (!ids.insert(r.id).second) throw ConfigError("duplicate reservoir id " + std::to_string(r.id));
    const std::string label = reservoir_label(r);
    for (double v : {r.level_min, r.level_max, r.discharge_min, r.discharge_max, r.level_initial,
                     r.conversion_rate, r.spill_max})
      if (!std::isfinite(v)) throw ConfigError(label + ": non-finite parameter");
    if (!(0.0 <= r.level_min && r.level_min <= r.level_initial && r.level_initial <= r.level_max))
      throw ConfigError(label + ": require 0 <= level_min <= level_initial <= level_max");
    if (!(0.0 <= r.discharge_min && r.discharge_min <= r.discharge_max))
      throw ConfigError(label + ": require 0 <= discharge_min <= discharge_max");
    if (r.conversion_rate < 0.0) throw ConfigError(label + ": conversion_rate must be >= 0");
    if (r.spill_max < 0.0) throw ConfigError(label + ": spill_max must be >= 0");
  }
}

ReservoirSystem ReservoirSystem::make_cascade(std::vector<ReservoirSpec> reservoirs,
                                              std::vector<std::pair<int, int>> downstream_upstream) {
  ReservoirSystem s;
  s.kind_ = SystemKind::cascade;
  s.reservoirs_ = std::move(reservoirs);
  s.links_ = std::move(downstream_upstream);
  s.validate_reservoirs();

  const std::size_t n = s.reservoirs_.size();
  s.cascade_matrix_ = DenseMatrix(n, n);
  for (std::size_t j = 0; j < n; ++j) s.cascade_matrix_(j, j) = -1.0;
  std::vector<int> downstream_of(n, -1);
  for (auto [down, up] : s.links_) {
    const std::size_t d = index_of(s.reservoirs_, down, "cascade_topology");
    const std::size_t u = index_of(s.reservoirs_, up, "cascade_topology");
    if (d == u) throw ConfigError("cascade_topology: reservoir " + std::to_string(down) + " linked to itself");
    if (downstream_of[u] != -1)
      throw ConfigError("cascade_topology: reservoir " + std::to_string(up) +
                        " drains into more than one downstream reservoir");
    downstream_of[u] = static_cast<int>(d);
    s.cascade_matrix_(d, u) = 1.0;
  }
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t steps = 0;
    for (int k = downstream_of[j]; k != -1; k = downstream_of[static_cast<std::size_t>(k)])
      if (++steps > n) throw ConfigError("cascade_topology: cycle through reservoir " +
                                         std::to_string(s.reservoirs_[j].id));
  }
  return s;
}

ReservoirSystem ReservoirSystem::make_network(std::vector<ReservoirSpec> reservoirs,
                                              std::vector<TunnelSpec> tunnels, double pump_efficiency) {
  ReservoirSystem s;
  s.kind_ = SystemKind::network;
  s.reservoirs_ = std::move(reservoirs);
  s.tunnels_ = std::move(tunnels);
  s.pump_efficiency_ = pump_efficiency;
  s.validate_reservoirs();
  if (!(pump_efficiency > 0.0 && pump_efficiency <= 1.0))
    throw ConfigError("pump_efficiency must lie in (0, 1]");
  if (s.tunnels_.empty()) throw ConfigError("network system has no tunnels");

  const std::size_t n = s.reservoirs_.size();
  const std::size_t g = s.tunnels_.size();
  s.release_incidence_ = DenseMatrix(n, g);
  s.pump_incidence_ = DenseMatrix(n, g);
  s.network_balance_ = DenseMatrix(n, g);
  for (std::size_t k = 0; k < g; ++k) {
    const TunnelSpec& t = s.tunnels_[k];
    const std::string label = "tunnels[" + std::to_string(k) + "]";
    const std::size_t from = index_of(s.reservoirs_, t.from_reservoir, label);
    const std::size_t to = index_of(s.reservoirs_, t.to_reservoir, label);
    if (from == to) throw ConfigError(label + ": from_reservoir equals to_reservoir");
    if (!(t.flow_max > 0.0) || !std::isfinite(t.flow_max)) throw ConfigError(label + ": flow_max must be > 0");
    if (!(t.conversion_rate >= 0.0) || !std::isfinite(t.conversion_rate))
      throw ConfigError(label + ": conversion_rate must be >= 0");
    if (t.direction == TunnelDirection::release) {
      s.release_incidence_(from, k) = 1.0;
      s.network_balance_(from, k) = -1.0;
      s.network_balance_(to, k) = 1.0;
    } else {
      s.pump_incidence_(to, k) = 1.0;
      s.network_balance_(from, k) = -1.0;
      s.network_balance_(to, k) = pump_efficiency;
    }
  }
  return s;
}

double ReservoirSystem::tunnel_sign(std::size_t tunnel) const {
  return tunnels_.at(tunnel).direction == TunnelDirection::release ? 1.0 : -1.0;
}

std::vector<double> ReservoirSystem::terminal_conversion() const {
  std::vector<double> g(reservoirs_.size(), 0.0);
  if (is_cascade()) {
    for (std::size_t j = 0; j < reservoirs_.size(); ++j) g[j] = reservoirs_[j].conversion_rate;
    return g;
  }
  for (const auto& t : tunnels_) {
    if (t.direction != TunnelDirection::release) continue;
    const std::size_t from = index_of(reservoirs_, t.from_reservoir, "tunnel");
    g[from] = std::max(g[from], t.conversion_rate);
  }
  return g;
}

std::vector<bool> ReservoirSystem::head_reservoirs() const {
  std::vector<bool> head(reservoirs_.size(), true);
  if (is_cascade()) {
    for (auto [down, up] : links_) head[index_of(reservoirs_, down, "cascade")] = false;
  } else {
    for (const auto& t : tunnels_)
      if (t.direction == TunnelDirection::release) head[index_of(reservoirs_, t.to_reservoir, "tunnel")] = false;
  }
  return head;
}

std::vector<double> ReservoirSystem::initial_levels() const {
  std::vector<double> l;
  l.reserve(reservoirs_.size());
  for (const auto& r : reservoirs_) l.push_back(r.level_initial);
  return l;
}

std::string ReservoirSystem::hash() const {
  const std::string text = to_json(*this);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string to_json(const ReservoirSystem& system) {
  json j;
  j["kind"] = system.is_cascade() ? "cascade" : "network";
  json rs = json::array();
  for (const auto& r : system.reservoirs()) {
    rs.push_back({{"id", r.id},
                  {"level_min", r.level_min},
                  {"level_max", r.level_max},
                  {"discharge_min", r.discharge_min},
                  {"discharge_max", r.discharge_max},
                  {"level_initial", r.level_initial},
                  {"conversion_rate", r.conversion_rate},
                  {"spill_max", r.spill_max}});
  }
  j["reservoirs"] = rs;
  if (system.is_cascade()) {
    json links = json::array();
    for (auto [d, u] : system.cascade_links()) links.push_back({d, u});
    j["cascade_topology"] = links;
  } else {
    json ts = json::array();
    for (const auto& t : system.tunnels()) {
      ts.push_back({{"from_reservoir", t.from_reservoir},
                    {"to_reservoir", t.to_reservoir},
                    {"direction", t.direction == TunnelDirection::release ? "release" : "pump"},
                    {"conversion_rate", t.conversion_rate},
                    {"flow_max", t.flow_max}});
    }
    j["tunnels"] = ts;
    j["pump_efficiency"] = system.pump_efficiency();
  }
  return j.dump(2);
}

ReservoirSystem parse_system(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": invalid JSON: " + e.what());
  }
  FieldReader top(root, "", origin);
  const std::string kind = top.string("kind");
  const json& rs = top.at("reservoirs");
  if (!rs.is_array()) top.fail("reservoirs", "expected an array");

  std::vector<ReservoirSpec> reservoirs;
  for (std::size_t i = 0; i < rs.size(); ++i) {
    FieldReader f(rs[i], "reservoirs[" + std::to_string(i) + "]", origin);
    ReservoirSpec r;
    r.id = f.integer("id");
    r.level_min = f.number("level_min");
    r.level_max = f.number("level_max");
    r.discharge_min = f.number_or("discharge_min", 0.0);
    r.discharge_max = f.number("discharge_max");
    r.level_initial = f.number("level_initial");
    r.conversion_rate = f.number_or("conversion_rate", 0.0);
    r.spill_max = f.number_or("spill_max", 0.0);
    reservoirs.push_back(r);
  }

  try {
    if (kind == "cascade") {
      const json& topo = top.at("cascade_topology");
      if (!topo.is_array()) top.fail("cascade_topology", "expected an array of [downstream, upstream] pairs");
      std::vector<std::pair<int, int>> links;
      for (std::size_t i = 0; i < topo.size(); ++i) {
        const json& pair = topo[i];
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_integer() || !pair[1].is_number_integer())
          top.fail("cascade_topology[" + std::to_string(i) + "]", "expected [downstream, upstream] integers");
        links.emplace_back(pair[0].get<int>(), pair[1].get<int>());
      }
      return ReservoirSystem::make_cascade(std::move(reservoirs), std::move(links));
    }
    if (kind == "network") {
      const json& ts = top.at("tunnels");
      if (!ts.is_array()) top.fail("tunnels", "expected an array");
      std::vector<TunnelSpec> tunnels;
      for (std::size_t i = 0; i < ts.size(); ++i) {
        FieldReader f(ts[i], "tunnels[" + std::to_string(i) + "]", origin);
        TunnelSpec t;
        t.from_reservoir = f.integer("from_reservoir");
        t.to_reservoir = f.integer("to_reservoir");
        const std::string dir = f.string("direction");
        if (dir == "release") {
          t.direction = TunnelDirection::release;
        } else if (dir == "pump") {
          t.direction = TunnelDirection::pump;
        } else {
          f.fail("direction", "expected \"release\" or \"pump\"");
        }
        t.conversion_rate = f.number("conversion_rate");
        t.flow_max = f.number("flow_max");
        tunnels.push_back(t);
      }
      return ReservoirSystem::make_network(std::move(reservoirs), std::move(tunnels), top.number("pump_efficiency"));
    }
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    if (msg.rfind(origin, 0) == 0) throw;
    throw ConfigError(origin + ": " + msg);
  }
  top.fail("kind", "expected \"cascade\" or \"network\"");
}

ReservoirSystem load_system(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open system file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_system(buf.str(), path.string());
}

}  // namespace hydro_adp
