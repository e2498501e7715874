#include "hydro_adp/arma.hpp"

#include <algorithm>
#include <string>

#include "hydro_adp/errors.hpp"

namespace hydro_adp {
namespace {

std::vector<LagTerm> nonzero_tail(const std::vector<double>& dense) {
  std::vector<LagTerm> out;
  for (std::size_t k = 1; k < dense.size(); ++k)
    if (dense[k] != 0.0) out.push_back({static_cast<int>(k), dense[k]});
  return out;
}

}  // namespace

std::vector<double> expand_polynomial(const std::vector<LagPolynomial>& factors) {
  std::vector<double> poly{1.0};
  for (const auto& factor : factors) {
    int degree = 0;
    for (const auto& term : factor) {
      if (term.lag < 1) throw ContractViolation("lag polynomial: lag must be >= 1, got " + std::to_string(term.lag));
      degree = std::max(degree, term.lag);
    }
    std::vector<double> next(poly.size() + static_cast<std::size_t>(degree), 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      next[i] += poly[i];
      for (const auto& term : factor) next[i + static_cast<std::size_t>(term.lag)] += poly[i] * term.coefficient;
    }
    poly = std::move(next);
  }
  while (poly.size() > 1 && poly.back() == 0.0) poly.pop_back();
  return poly;
}

ExpandedArma::ExpandedArma(const ArmaSpec& spec)
    : ar(nonzero_tail(expand_polynomial(spec.ar_factors))),
      ma(nonzero_tail(expand_polynomial(spec.ma_factors))),
      initial_level(spec.initial_level) {
  for (const auto& t : ar) max_lag = std::max(max_lag, t.lag);
  for (const auto& t : ma) max_lag = std::max(max_lag, t.lag);
}

double ExpandedArma::step(std::span<const double> history, std::span<const double> innovations,
                          double innovation) const {
  const auto hn = static_cast<std::ptrdiff_t>(history.size());
  const auto wn = static_cast<std::ptrdiff_t>(innovations.size());
  double x = innovation;
  for (const auto& t : ar) {
    const std::ptrdiff_t i = hn - t.lag;
    x -= t.coefficient * (i >= 0 ? history[static_cast<std::size_t>(i)] : initial_level);
  }
  for (const auto& t : ma) {
    const std::ptrdiff_t i = wn - t.lag;
    if (i >= 0) x += t.coefficient * innovations[static_cast<std::size_t>(i)];
  }
  return x;
}

double forecast_one_step(const ArmaSpec& spec, std::span<const double> history,
                         std::span<const double> recent_innovations) {
  return ExpandedArma(spec).step(history, recent_innovations, 0.0);
}

ArmaSpec scaled(ArmaSpec spec, double factor) {
  spec.initial_level *= factor;
  spec.noise_std *= factor;
  return spec;
}

namespace shipped {

ArmaSpec price() {
  ArmaSpec s;
  s.ar_factors = {{{1, -0.6874}}, {{1, -1.0}}, {{24, -1.0}}, {{168, -1.0}}};
  s.ma_factors = {{{1, -0.9234}}, {{24, -0.8502}}, {{168, -0.9665}}};
  s.noise_std = 0.2369;
  s.initial_level = 20.0;
  return s;
}

ArmaSpec upper_inflow() {
  ArmaSpec s;
  s.ar_factors = {{{1, -0.9899}}, {{1, -1.0}}};
  s.ma_factors = {{{1, -1.3156}, {2, 0.3504}}, {{41, -0.8424}}};
  s.noise_std = 0.6549;
  s.initial_level = 50.0;
  return s;
}

ArmaSpec lower_inflow() {
  ArmaSpec s;
  s.ar_factors = {{{1, -0.9775}}, {{1, -1.0}}};
  s.ma_factors = {{{1, -1.4442}, {2, 0.5509}}, {{41, -0.8304}}};
  s.noise_std = 0.1646;
  s.initial_level = 50.0;
  return s;
}

}  // namespace shipped
}  // namespace hydro_adp
