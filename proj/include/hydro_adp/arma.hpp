#pragma once

#include <span>
#include <vector>

namespace hydro_adp {

struct LagTerm {
  int lag = 1;
  double coefficient = 0.0;
};

/// Sparse lag polynomial 1 + sum_i coefficient_i B^lag_i; the constant 1 is implicit.
using LagPolynomial = std::vector<LagTerm>;

/// Factored (seasonal) ARMA model:
///   prod(ar_factors)(B) x_t = prod(ma_factors)(B) w_t,  w_t ~ N(0, noise_std^2).
struct ArmaSpec {
  std::vector<LagPolynomial> ar_factors;
  std::vector<LagPolynomial> ma_factors;
  double noise_std = 0.0;
  double initial_level = 0.0;
};

/// Dense coefficients of the product of the factors, index = lag, [0] == 1.
std::vector<double> expand_polynomial(const std::vector<LagPolynomial>& factors);

/// Expanded model kept as nonzero (lag, coefficient) pairs, lag >= 1, for the recursion
///   x_t = -sum A_k x_{t-k} + w_t + sum M_k w_{t-k}.
struct ExpandedArma {
  std::vector<LagTerm> ar;
  std::vector<LagTerm> ma;
  int max_lag = 0;
  double initial_level = 0.0;

  explicit ExpandedArma(const ArmaSpec& spec);

  /// Next value given the full past (most recent last) and the innovation at the new step.
  /// Values before the start of `history` are taken as initial_level with zero noise.
  double step(std::span<const double> history, std::span<const double> innovations, double innovation) const;
};

/// Conditional mean of the next value: the recursion with the next innovation set to zero.
double forecast_one_step(const ArmaSpec& spec, std::span<const double> history,
                         std::span<const double> recent_innovations);

/// Multiplies initial level and noise by `factor`.
ArmaSpec scaled(ArmaSpec spec, double factor);

namespace shipped {
/// Hourly electricity price: AR (1-0.6874B)(1-B)(1-B^24)(1-B^168),
/// MA (1-0.9234B)(1-0.8502B^24)(1-0.9665B^168), sigma 0.2369, start 20 $/MWh.
ArmaSpec price();
/// Inflow of a head (upstream) reservoir, start 50.
ArmaSpec upper_inflow();
/// Inflow of a downstream reservoir, start 50.
ArmaSpec lower_inflow();
inline constexpr double inflow_correlation = 0.0417;
/// Capacity that the shipped inflow models are sized for.
inline constexpr double reference_capacity = 1130.0;
}  // namespace shipped

}  // namespace hydro_adp
