#include "hydro_adp/scenarios.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "hydro_adp/errors.hpp"

namespace hydro_adp {
namespace {

enum Stream : std::uint64_t { price_stream = 0, inflow_stream = 1 };

std::mt19937_64 substream(std::uint64_t seed, std::uint64_t sample, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(sample), static_cast<std::uint32_t>(sample >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

std::vector<std::vector<double>> cholesky_impl(const std::vector<std::vector<double>>& corr) {
  const std::size_t n = corr.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (corr[i].size() != n) throw ConfigError("inflow correlation matrix is not square");
    if (std::abs(corr[i][i] - 1.0) > 1e-12) throw ConfigError("inflow correlation matrix needs a unit diagonal");
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(corr[i][j] - corr[j][i]) > 1e-12) throw ConfigError("inflow correlation matrix is not symmetric");
  }
  std::vector<std::vector<double>> l(n, std::vector<double>(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) {
    double d = corr[j][j];
    for (std::size_t k = 0; k < j; ++k) d -= l[j][k] * l[j][k];
    if (d < -1e-10) throw ConfigError("inflow correlation matrix is not positive semidefinite");
    l[j][j] = d > 0.0 ? std::sqrt(d) : 0.0;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = corr[i][j];
      for (std::size_t k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
      if (l[j][j] > 0.0) {
        l[i][j] = s / l[j][j];
      } else if (std::abs(s) > 1e-10) {
        throw ConfigError("inflow correlation matrix is not positive semidefinite");
      }
    }
  }
  return l;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<std::vector<double>> correlation_factor(const std::vector<std::vector<double>>& corr) {
  return cholesky_impl(corr);
}

const char* to_string(ScenarioRole role) { return role == ScenarioRole::training ? "training" : "test"; }

SamplePath ScenarioSet::path(std::size_t sample) const {
  if (sample >= n_samples()) throw ContractViolation("scenario index out of range");
  return {prices[sample], inflows[sample], terminal_prices[sample]};
}

void ScenarioSet::check_shape() const {
  const std::size_t n = n_samples();
  if (inflows.size() != n || terminal_prices.size() != n)
    throw ContractViolation("scenario set: per-sample arrays disagree in length");
  const std::size_t j = num_reservoirs();
  for (std::size_t s = 0; s < n; ++s) {
    if (prices[s].size() != horizon || inflows[s].size() != horizon)
      throw ContractViolation("scenario set: sample " + std::to_string(s) + " does not span the horizon");
    for (const auto& row : inflows[s])
      if (row.size() != j) throw ContractViolation("scenario set: ragged inflow rows");
  }
}

ScenarioSet simulate(const ArmaSpec& price_spec, const std::vector<ArmaSpec>& inflow_specs, const NoiseModel& noise,
                     std::size_t horizon, std::size_t n_samples, std::uint64_t seed, ScenarioRole role) {
  if (horizon < 1) throw ConfigError("scenario horizon must be at least 1");
  const std::size_t nj = inflow_specs.size();
  if (noise.inflow_stds.size() != nj || noise.inflow_corr.size() != nj)
    throw ConfigError("noise model does not match the number of inflow series");
  if (noise.price_std < 0.0) throw ConfigError("price noise std must be non-negative");
  for (double s : noise.inflow_stds)
    if (s < 0.0) throw ConfigError("inflow noise std must be non-negative");
  const auto chol = correlation_factor(noise.inflow_corr);

  const ExpandedArma price_model(price_spec);
  std::vector<ExpandedArma> inflow_models;
  for (const auto& s : inflow_specs) inflow_models.emplace_back(s);

  const std::size_t total = burn_in_hours + horizon;
  ScenarioSet out;
  out.horizon = horizon;
  out.seed = seed;
  out.role = role;
  out.prices.resize(n_samples);
  out.inflows.resize(n_samples);
  out.terminal_prices.resize(n_samples);

  std::vector<double> x, w;
  std::vector<std::vector<double>> ix(nj), iw(nj);
  std::vector<double> u(nj);
  for (std::size_t s = 0; s < n_samples; ++s) {
    std::normal_distribution<double> normal(0.0, 1.0);
    auto price_rng = substream(seed, s, price_stream);
    x.clear();
    w.clear();
    for (std::size_t t = 0; t < total; ++t) {
      const double e = noise.price_std * normal(price_rng);
      x.push_back(price_model.step(x, w, e));
      w.push_back(e);
    }
    out.prices[s].assign(x.begin() + static_cast<std::ptrdiff_t>(burn_in_hours), x.end());
    out.terminal_prices[s] = price_model.step(x, w, 0.0);

    auto inflow_rng = substream(seed, s, inflow_stream);
    normal.reset();
    for (std::size_t j = 0; j < nj; ++j) {
      ix[j].clear();
      iw[j].clear();
    }
    out.inflows[s].assign(horizon, std::vector<double>(nj, 0.0));
    for (std::size_t t = 0; t < total; ++t) {
      for (auto& e : u) e = normal(inflow_rng);
      for (std::size_t j = 0; j < nj; ++j) {
        double z = 0.0;
        for (std::size_t k = 0; k <= j; ++k) z += chol[j][k] * u[k];
        const double e = noise.inflow_stds[j] * z;
        ix[j].push_back(inflow_models[j].step(ix[j], iw[j], e));
        iw[j].push_back(e);
        if (t >= burn_in_hours) out.inflows[s][t - burn_in_hours][j] = std::max(0.0, ix[j].back());
      }
    }
  }
  return out;
}

ScenarioModel default_scenario_model(const ReservoirSystem& system) {
  ScenarioModel m;
  m.price = shipped::price();
  const auto heads = system.head_reservoirs();
  const std::size_t n = system.num_reservoirs();
  for (std::size_t j = 0; j < n; ++j) {
    ArmaSpec spec = heads[j] ? shipped::upper_inflow() : shipped::lower_inflow();
    if (!system.is_cascade()) spec = scaled(spec, system.reservoirs()[j].level_max / shipped::reference_capacity);
    m.inflows.push_back(spec);
    m.noise.inflow_stds.push_back(spec.noise_std);
  }
  m.noise.price_std = m.price.noise_std;
  m.noise.inflow_corr.assign(n, std::vector<double>(n, shipped::inflow_correlation));
  for (std::size_t j = 0; j < n; ++j) m.noise.inflow_corr[j][j] = 1.0;
  return m;
}

ScenarioSet simulate(const ScenarioModel& model, std::size_t horizon, std::size_t n_samples, std::uint64_t seed,
                     ScenarioRole role) {
  return simulate(model.price, model.inflows, model.noise, horizon, n_samples, seed, role);
}

std::string format_scenarios(const ScenarioSet& set) {
  set.check_shape();
  std::ostringstream os;
  os << "# seed=" << set.seed << "\n# role=" << to_string(set.role) << "\n# horizon=" << set.horizon
     << "\n# samples=" << set.n_samples() << "\n";
  for (std::size_t s = 0; s < set.n_samples(); ++s) os << "# terminal_price," << s << ',' << fmt(set.terminal_prices[s]) << '\n';
  os << "sample,t,price";
  for (std::size_t j = 0; j < set.num_reservoirs(); ++j) os << ",inflow_" << j + 1;
  os << '\n';
  for (std::size_t s = 0; s < set.n_samples(); ++s)
    for (std::size_t t = 0; t < set.horizon; ++t) {
      os << s << ',' << t + 1 << ',' << fmt(set.prices[s][t]);
      for (double v : set.inflows[s][t]) os << ',' << fmt(v);
      os << '\n';
    }
  return os.str();
}

void save_scenarios(const ScenarioSet& set, const std::filesystem::path& path) {
  const std::string text = format_scenarios(set);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError(path.string() + ": cannot open for writing");
  f << text;
  if (!f) throw ConfigError(path.string() + ": write failed");
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_double(const std::string& cell, const std::string& where) {
  if (cell.empty()) throw ParseError(where + ": empty value");
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end != cell.c_str() + cell.size() || !std::isfinite(v)) throw ParseError(where + ": not a number: '" + cell + "'");
  return v;
}

std::uint64_t parse_uint(const std::string& cell, const std::string& where) {
  if (cell.empty() || cell.find_first_not_of("0123456789") != std::string::npos)
    throw ParseError(where + ": not a non-negative integer: '" + cell + "'");
  return std::stoull(cell);
}

}  // namespace

ScenarioSet parse_scenarios(const std::string& text, const std::string& origin) {
  std::istringstream is(text);
  std::string line;
  std::size_t row = 0;
  ScenarioSet set;
  bool have_horizon = false;
  std::vector<std::pair<std::size_t, double>> terminal;
  std::vector<std::string> header;

  while (std::getline(is, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] != '#') {
      header = split(line);
      break;
    }
    const std::string where = origin + ": row " + std::to_string(row);
    const std::string body = line.substr(line.find_first_not_of("# "));
    if (body.rfind("seed=", 0) == 0) {
      set.seed = parse_uint(body.substr(5), where);
    } else if (body.rfind("role=", 0) == 0) {
      const std::string r = body.substr(5);
      if (r == "training") set.role = ScenarioRole::training;
      else if (r == "test") set.role = ScenarioRole::test;
      else throw ParseError(where + ": unknown role '" + r + "'");
    } else if (body.rfind("horizon=", 0) == 0) {
      set.horizon = parse_uint(body.substr(8), where);
      have_horizon = true;
    } else if (body.rfind("terminal_price,", 0) == 0) {
      const auto cells = split(body);
      if (cells.size() != 3) throw ParseError(where + ": terminal_price line needs sample and value");
      terminal.emplace_back(parse_uint(cells[1], where + ", column 2"), parse_double(cells[2], where + ", column 3"));
    }
  }
  if (header.empty()) throw ParseError(origin + ": no header row");
  const std::vector<std::string> fixed{"sample", "t", "price"};
  for (std::size_t c = 0; c < fixed.size(); ++c)
    if (c >= header.size() || header[c] != fixed[c])
      throw ParseError(origin + ": row " + std::to_string(row) + ", column " + std::to_string(c + 1) +
                       ": expected header '" + fixed[c] + "'");
  const std::size_t nj = header.size() - fixed.size();
  if (nj == 0) throw ParseError(origin + ": row " + std::to_string(row) + ", column 4: missing column 'inflow_1'");
  for (std::size_t j = 0; j < nj; ++j)
    if (header[fixed.size() + j] != "inflow_" + std::to_string(j + 1))
      throw ParseError(origin + ": row " + std::to_string(row) + ", column " + std::to_string(fixed.size() + j + 1) +
                       ": expected header 'inflow_" + std::to_string(j + 1) + "'");

  while (std::getline(is, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    const std::string where = origin + ": row " + std::to_string(row);
    if (cells.size() != header.size())
      throw ParseError(where + ": expected " + std::to_string(header.size()) + " columns, got " +
                       std::to_string(cells.size()));
    const std::size_t s = parse_uint(cells[0], where + ", column 1");
    const std::size_t t = parse_uint(cells[1], where + ", column 2");
    if (s == set.prices.size()) {
      set.prices.emplace_back();
      set.inflows.emplace_back();
    }
    if (s + 1 != set.prices.size() || t != set.prices.back().size() + 1)
      throw ParseError(where + ", column " + std::string(s + 1 != set.prices.size() ? "1" : "2") +
                       ": rows must be ordered by sample then t");
    set.prices.back().push_back(parse_double(cells[2], where + ", column 3"));
    std::vector<double> inflow(nj);
    for (std::size_t j = 0; j < nj; ++j) {
      inflow[j] = parse_double(cells[3 + j], where + ", column " + std::to_string(4 + j));
      if (inflow[j] < 0.0) throw ParseError(where + ", column " + std::to_string(4 + j) + ": negative inflow");
    }
    set.inflows.back().push_back(std::move(inflow));
  }
  if (set.prices.empty()) throw ParseError(origin + ": no data rows");
  if (!have_horizon) set.horizon = set.prices.front().size();
  for (std::size_t s = 0; s < set.prices.size(); ++s)
    if (set.prices[s].size() != set.horizon)
      throw ParseError(origin + ": sample " + std::to_string(s) + " has " + std::to_string(set.prices[s].size()) +
                       " rows, expected " + std::to_string(set.horizon));
  set.terminal_prices.assign(set.prices.size(), 0.0);
  std::vector<bool> seen(set.prices.size(), false);
  for (auto [s, v] : terminal) {
    if (s >= seen.size()) throw ParseError(origin + ": terminal price for unknown sample " + std::to_string(s));
    set.terminal_prices[s] = v;
    seen[s] = true;
  }
  for (std::size_t s = 0; s < seen.size(); ++s)
    if (!seen[s]) throw ParseError(origin + ": missing terminal price for sample " + std::to_string(s));
  return set;
}

ScenarioSet load_scenarios(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ParseError(path.string() + ": cannot open");
  std::ostringstream ss;
  ss << f.rdbuf();
  const std::string text = ss.str();
  if (text.empty()) throw ParseError(path.string() + ": empty file");
  return parse_scenarios(text, path.string());
}

}  // namespace hydro_adp
