#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace hydro_adp {

/// Row-major dense matrix; the LPs in this project are small enough that
/// sparse storage buys nothing.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  const std::vector<double>& data() const { return data_; }

  bool operator==(const DenseMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// maximize objective^T x + objective_offset
/// subject to eq_matrix x = eq_rhs, lower <= x <= upper (all bounds finite).
struct LpProblem {
  std::vector<double> objective;
  DenseMatrix eq_matrix;
  std::vector<double> eq_rhs;
  std::vector<double> lower;
  std::vector<double> upper;
  double objective_offset = 0.0;

  std::size_t num_vars() const { return objective.size(); }
  std::size_t num_rows() const { return eq_rhs.size(); }
};

enum class LpStatus { optimal, infeasible };

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  std::vector<double> x;
  double value = 0.0;  // includes objective_offset
  std::size_t iterations = 0;
  /// Equality-row multipliers y with reduced costs objective - A^T y.
  std::vector<double> duals;
  std::vector<double> reduced_costs;

  bool optimal() const { return status == LpStatus::optimal; }
};

namespace lp_tolerance {
inline constexpr double feasibility = 1e-7;  // relative to 1 + |b|_inf
inline constexpr double optimality = 1e-7;   // reduced costs, relative to 1 + |c|_inf
inline constexpr double bounds = 1e-9;
}  // namespace lp_tolerance

/// Bounded-variable revised simplex with Bland's rule. Phase 1 uses one
/// artificial per equality row. Deterministic: identical input gives
/// bit-identical output.
///
/// Throws ContractViolation on inconsistent dimensions, non-finite data,
/// lower > upper or more rows than columns.
LpSolution solve(const LpProblem& problem);

/// Checks the certificate conditions of an optimal solution: primal residual,
/// bounds and sign-correct reduced costs. Returns false for infeasible status.
bool verify_optimal(const LpProblem& problem, const LpSolution& solution);

/// Plain-text dump for bug reports: dimensions, then objective, bounds and rows.
void dump(const LpProblem& problem, std::ostream& out);

}  // namespace hydro_adp
