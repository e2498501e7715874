#include "hydro_adp/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <utility>

#include "hydro_adp/errors.hpp"

namespace hydro_adp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-9;
constexpr std::size_t kRefactorEvery = 64;

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double e : v) m = std::max(m, std::abs(e));
  return m;
}

void check_problem(const LpProblem& p) {
  const std::size_t n = p.num_vars();
  const std::size_t m = p.num_rows();
  if (p.lower.size() != n || p.upper.size() != n)
    throw ContractViolation("lp: bound vectors must have one entry per variable");
  if (p.eq_matrix.rows() != m || (m > 0 && p.eq_matrix.cols() != n))
    throw ContractViolation("lp: equality matrix is " + std::to_string(p.eq_matrix.rows()) + "x" +
                            std::to_string(p.eq_matrix.cols()) + ", expected " +
                            std::to_string(m) + "x" + std::to_string(n));
  if (m > n) throw ContractViolation("lp: more equality rows than variables");
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::ranges::all_of(p.objective, finite) || !std::ranges::all_of(p.eq_rhs, finite) ||
      !std::ranges::all_of(p.lower, finite) || !std::ranges::all_of(p.upper, finite) ||
      !std::ranges::all_of(p.eq_matrix.data(), finite) || !std::isfinite(p.objective_offset))
    throw ContractViolation("lp: non-finite input");
  for (std::size_t j = 0; j < n; ++j)
    if (p.lower[j] > p.upper[j])
      throw ContractViolation("lp: lower > upper for variable " + std::to_string(j));
}

enum class VarState : unsigned char { basic, at_lower, at_upper };

// Structural columns 0..n-1 followed by one artificial per row. The basis
// inverse is kept explicitly and refreshed by Gauss-Jordan every few pivots.
class BoundedSimplex {
 public:
  explicit BoundedSimplex(const LpProblem& p)
      : p_(p), m_(p.num_rows()), n_(p.num_vars()), total_(n_ + m_) {
    columns_.resize(n_);
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t j = 0; j < n_; ++j)
        if (double a = p.eq_matrix(i, j); a != 0.0) columns_[j].emplace_back(i, a);

    lo_.assign(total_, 0.0);
    up_.assign(total_, kInf);
    x_.assign(total_, 0.0);
    state_.assign(total_, VarState::at_lower);
    for (std::size_t j = 0; j < n_; ++j) {
      lo_[j] = p.lower[j];
      up_[j] = p.upper[j];
      x_[j] = p.lower[j];
    }

    std::vector<double> residual = p.eq_rhs;
    for (std::size_t j = 0; j < n_; ++j)
      for (auto [i, a] : columns_[j]) residual[i] -= a * x_[j];

    art_sign_.resize(m_);
    basis_.resize(m_);
    binv_.assign(m_ * m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      art_sign_[i] = residual[i] >= 0.0 ? 1.0 : -1.0;
      const std::size_t v = n_ + i;
      basis_[i] = v;
      state_[v] = VarState::basic;
      x_[v] = std::abs(residual[i]);
      binv_[i * m_ + i] = art_sign_[i];
    }
  }

  LpSolution run() {
    LpSolution sol;
    const double feas_tol = lp_tolerance::feasibility * (1.0 + inf_norm(p_.eq_rhs));

    if (m_ > 0) {
      std::vector<double> phase1(total_, 0.0);
      for (std::size_t i = 0; i < m_; ++i) phase1[n_ + i] = -1.0;
      optimize(phase1, 1e-9);
      refactor();
      double infeasibility = 0.0;
      for (std::size_t i = 0; i < m_; ++i) infeasibility += x_[n_ + i];
      if (infeasibility > feas_tol) {
        sol.status = LpStatus::infeasible;
        sol.iterations = iterations_;
        sol.x.assign(x_.begin(), x_.begin() + static_cast<std::ptrdiff_t>(n_));
        return sol;
      }
      for (std::size_t i = 0; i < m_; ++i) retire_artificial(n_ + i);
    }

    std::vector<double> phase2(total_, 0.0);
    std::copy(p_.objective.begin(), p_.objective.end(), phase2.begin());
    const double cmax = inf_norm(p_.objective);
    optimize(phase2, cmax > 0.0 ? 1e-9 * cmax : 1e-12);
    if (m_ > 0) refactor();

    sol.status = LpStatus::optimal;
    sol.iterations = iterations_;
    sol.x.assign(x_.begin(), x_.begin() + static_cast<std::ptrdiff_t>(n_));
    sol.value = p_.objective_offset;
    for (std::size_t j = 0; j < n_; ++j) sol.value += p_.objective[j] * sol.x[j];
    sol.duals = duals(phase2);
    sol.reduced_costs.resize(n_);
    for (std::size_t j = 0; j < n_; ++j) sol.reduced_costs[j] = phase2[j] - column_dot(j, sol.duals);
    return sol;
  }

 private:
  double column_dot(std::size_t j, const std::vector<double>& y) const {
    if (j >= n_) return art_sign_[j - n_] * y[j - n_];
    double s = 0.0;
    for (auto [i, a] : columns_[j]) s += a * y[i];
    return s;
  }

  std::vector<double> duals(const std::vector<double>& cost) const {
    std::vector<double> y(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      const double cb = cost[basis_[i]];
      if (cb == 0.0) continue;
      const double* row = &binv_[i * m_];
      for (std::size_t k = 0; k < m_; ++k) y[k] += cb * row[k];
    }
    return y;
  }

  std::vector<double> ftran(std::size_t j) const {
    std::vector<double> w(m_, 0.0);
    auto accumulate = [&](std::size_t k, double a) {
      for (std::size_t i = 0; i < m_; ++i) w[i] += binv_[i * m_ + k] * a;
    };
    if (j >= n_) {
      accumulate(j - n_, art_sign_[j - n_]);
    } else {
      for (auto [k, a] : columns_[j]) accumulate(k, a);
    }
    return w;
  }

  void retire_artificial(std::size_t v) {
    lo_[v] = 0.0;
    up_[v] = 0.0;
    if (state_[v] != VarState::basic) x_[v] = 0.0;
  }

  // Rebuilds the basis inverse from scratch and recomputes the basic values.
  void refactor() {
    since_refactor_ = 0;
    if (m_ == 0) return;
    std::vector<double> b(m_ * m_, 0.0);
    for (std::size_t c = 0; c < m_; ++c) {
      const std::size_t v = basis_[c];
      if (v >= n_) {
        b[(v - n_) * m_ + c] = art_sign_[v - n_];
      } else {
        for (auto [i, a] : columns_[v]) b[i * m_ + c] = a;
      }
    }
    std::vector<double> inv(m_ * m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) inv[i * m_ + i] = 1.0;
    for (std::size_t col = 0; col < m_; ++col) {
      std::size_t piv = col;
      for (std::size_t r = col + 1; r < m_; ++r)
        if (std::abs(b[r * m_ + col]) > std::abs(b[piv * m_ + col])) piv = r;
      if (std::abs(b[piv * m_ + col]) < 1e-12) throw NumericalError("lp: singular basis during refactorization");
      if (piv != col) {
        for (std::size_t k = 0; k < m_; ++k) {
          std::swap(b[piv * m_ + k], b[col * m_ + k]);
          std::swap(inv[piv * m_ + k], inv[col * m_ + k]);
        }
      }
      const double d = b[col * m_ + col];
      for (std::size_t k = 0; k < m_; ++k) {
        b[col * m_ + k] /= d;
        inv[col * m_ + k] /= d;
      }
      for (std::size_t r = 0; r < m_; ++r) {
        if (r == col) continue;
        const double f = b[r * m_ + col];
        if (f == 0.0) continue;
        for (std::size_t k = 0; k < m_; ++k) {
          b[r * m_ + k] -= f * b[col * m_ + k];
          inv[r * m_ + k] -= f * inv[col * m_ + k];
        }
      }
    }
    binv_ = std::move(inv);

    std::vector<double> rhs = p_.eq_rhs;
    for (std::size_t j = 0; j < total_; ++j) {
      if (state_[j] == VarState::basic || x_[j] == 0.0) continue;
      if (j >= n_) {
        rhs[j - n_] -= art_sign_[j - n_] * x_[j];
      } else {
        for (auto [i, a] : columns_[j]) rhs[i] -= a * x_[j];
      }
    }
    for (std::size_t i = 0; i < m_; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < m_; ++k) s += binv_[i * m_ + k] * rhs[k];
      x_[basis_[i]] = s;
    }
  }

  void pivot(std::size_t r, const std::vector<double>& w) {
    double* prow = &binv_[r * m_];
    const double d = w[r];
    for (std::size_t k = 0; k < m_; ++k) prow[k] /= d;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r || w[i] == 0.0) continue;
      double* row = &binv_[i * m_];
      const double f = w[i];
      for (std::size_t k = 0; k < m_; ++k) row[k] -= f * prow[k];
    }
  }

  void optimize(const std::vector<double>& cost, double dtol) {
    const std::size_t max_iter = 50 * (total_ + 10);
    std::size_t local = 0;
    for (;;) {
      if (since_refactor_ >= kRefactorEvery) refactor();
      const std::vector<double> y = duals(cost);

      // Bland: first eligible index enters.
      std::size_t q = total_;
      double dir = 0.0;
      for (std::size_t j = 0; j < total_; ++j) {
        if (state_[j] == VarState::basic || lo_[j] == up_[j]) continue;
        const double d = cost[j] - column_dot(j, y);
        if (state_[j] == VarState::at_lower && d > dtol) {
          q = j;
          dir = 1.0;
          break;
        }
        if (state_[j] == VarState::at_upper && d < -dtol) {
          q = j;
          dir = -1.0;
          break;
        }
      }
      if (q == total_) return;
      if (++local > max_iter) throw NumericalError("lp: iteration limit exceeded (cycling or modeling bug)");
      ++iterations_;
      ++since_refactor_;

      const std::vector<double> w = ftran(q);
      double theta = up_[q] - lo_[q];
      std::size_t leave = m_;
      for (std::size_t i = 0; i < m_; ++i) {
        if (std::abs(w[i]) <= kPivotTol) continue;
        const std::size_t v = basis_[i];
        const double rate = dir * w[i];
        double ratio;
        if (rate > 0.0) {
          ratio = (x_[v] - lo_[v]) / rate;
        } else {
          if (up_[v] == kInf) continue;
          ratio = (up_[v] - x_[v]) / -rate;
        }
        ratio = std::max(ratio, 0.0);
        const double tie = 1e-12 * std::max(1.0, std::min(theta, 1e300));
        if (ratio < theta - tie) {
          theta = ratio;
          leave = i;
        } else if (leave != m_ && ratio <= theta + tie && v < basis_[leave]) {
          leave = i;
        }
      }
      if (theta == kInf) throw NumericalError("lp: unbounded direction in a boxed problem");

      x_[q] += dir * theta;
      for (std::size_t i = 0; i < m_; ++i) x_[basis_[i]] -= dir * theta * w[i];

      if (leave == m_) {
        if (dir > 0.0) {
          state_[q] = VarState::at_upper;
          x_[q] = up_[q];
        } else {
          state_[q] = VarState::at_lower;
          x_[q] = lo_[q];
        }
        continue;
      }

      const std::size_t v = basis_[leave];
      if (dir * w[leave] > 0.0) {
        state_[v] = VarState::at_lower;
        x_[v] = lo_[v];
      } else {
        state_[v] = VarState::at_upper;
        x_[v] = up_[v];
      }
      if (v >= n_) {
        retire_artificial(v);
        state_[v] = VarState::at_lower;
      }
      state_[q] = VarState::basic;
      basis_[leave] = q;
      pivot(leave, w);
    }
  }

  const LpProblem& p_;
  std::size_t m_;
  std::size_t n_;
  std::size_t total_;
  std::vector<std::vector<std::pair<std::size_t, double>>> columns_;
  std::vector<double> art_sign_;
  std::vector<double> lo_;
  std::vector<double> up_;
  std::vector<double> x_;
  std::vector<VarState> state_;
  std::vector<std::size_t> basis_;
  std::vector<double> binv_;
  std::size_t iterations_ = 0;
  std::size_t since_refactor_ = 0;
};

}  // namespace

LpSolution solve(const LpProblem& problem) {
  check_problem(problem);
  BoundedSimplex simplex(problem);
  return simplex.run();
}

bool verify_optimal(const LpProblem& p, const LpSolution& s) {
  if (!s.optimal()) return false;
  const std::size_t n = p.num_vars();
  const std::size_t m = p.num_rows();
  if (s.x.size() != n || s.duals.size() != m || s.reduced_costs.size() != n) return false;

  const double feas_tol = lp_tolerance::feasibility * (1.0 + inf_norm(p.eq_rhs));
  for (std::size_t i = 0; i < m; ++i) {
    double r = -p.eq_rhs[i];
    for (std::size_t j = 0; j < n; ++j) r += p.eq_matrix(i, j) * s.x[j];
    if (std::abs(r) > feas_tol) return false;
  }
  for (std::size_t j = 0; j < n; ++j) {
    const double tol = lp_tolerance::bounds * (1.0 + std::max(std::abs(p.lower[j]), std::abs(p.upper[j])));
    if (s.x[j] < p.lower[j] - tol || s.x[j] > p.upper[j] + tol) return false;
  }
  const double opt_tol = lp_tolerance::optimality * (1.0 + inf_norm(p.objective));
  for (std::size_t j = 0; j < n; ++j) {
    double d = p.objective[j];
    for (std::size_t i = 0; i < m; ++i) d -= p.eq_matrix(i, j) * s.duals[i];
    const double span = p.upper[j] - p.lower[j];
    const double slack_tol = 1e-9 * (1.0 + span);
    const bool can_increase = s.x[j] < p.upper[j] - slack_tol;
    const bool can_decrease = s.x[j] > p.lower[j] + slack_tol;
    if (can_increase && d > opt_tol) return false;
    if (can_decrease && d < -opt_tol) return false;
  }
  return true;
}

void dump(const LpProblem& p, std::ostream& out) {
  const auto old_precision = out.precision(17);
  out << "lp " << p.num_rows() << " rows " << p.num_vars() << " vars\n";
  out << "offset " << p.objective_offset << "\n";
  out << "objective";
  for (double c : p.objective) out << ' ' << c;
  out << "\nlower";
  for (double v : p.lower) out << ' ' << v;
  out << "\nupper";
  for (double v : p.upper) out << ' ' << v;
  out << '\n';
  for (std::size_t i = 0; i < p.num_rows(); ++i) {
    out << "row " << i;
    for (double a : p.eq_matrix.row(i)) out << ' ' << a;
    out << " = " << p.eq_rhs[i] << '\n';
  }
  out.precision(old_precision);
}

}  // namespace hydro_adp
