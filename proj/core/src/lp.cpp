#include "confsa/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "confsa/error.hpp"

namespace confsa {

void LinearProgram::add_row(std::vector<double> coefficients, RowSense sense, double b) {
  if (coefficients.size() != num_vars) throw ContractError("row length differs from variable count");
  rows.push_back(std::move(coefficients));
  senses.push_back(sense);
  rhs.push_back(b);
}

struct SimplexSolver::Impl {
  std::size_t n = 0;      // structural variables
  std::size_t cols = 0;   // all columns excluding rhs
  std::size_t m = 0;      // live rows
  double tol = 1e-8;
  std::vector<double> t;  // m x (cols + 1), row-major
  std::vector<double> d;  // reduced costs (maximization)
  std::vector<double> cost;
  std::vector<std::size_t> basis;
  std::vector<bool> artificial;
  bool feasible = false;
  bool solved = false;
  std::size_t pivots = 0;

  double& at(std::size_t i, std::size_t j) { return t[i * (cols + 1) + j]; }
  double& rhs(std::size_t i) { return t[i * (cols + 1) + cols]; }

  void pivot(std::size_t r, std::size_t c) {
    const std::size_t w = cols + 1;
    double* pr = &t[r * w];
    const double p = pr[c];
    for (std::size_t j = 0; j < w; ++j) pr[j] /= p;
    pr[c] = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == r) continue;
      double* row = &t[i * w];
      const double f = row[c];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < w; ++j) row[j] -= f * pr[j];
      row[c] = 0.0;
    }
    const double f = d[c];
    if (f != 0.0) {
      for (std::size_t j = 0; j < cols; ++j) d[j] -= f * pr[j];
      d[c] = 0.0;
    }
    basis[r] = c;
    ++pivots;
  }

  void price(const std::vector<double>& c) {
    cost = c;
    d = c;
    for (std::size_t i = 0; i < m; ++i) {
      const double cb = cost[basis[i]];
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j < cols; ++j) d[j] -= cb * at(i, j);
    }
  }

  double objective_value() {
    double v = 0.0;
    for (std::size_t i = 0; i < m; ++i) v += cost[basis[i]] * rhs(i);
    return v;
  }

  // Bland's rule: lowest-index improving column, ties in the ratio test
  // broken by the lowest basic variable index.
  LpStatus iterate(bool allow_artificial) {
    for (;;) {
      std::size_t enter = cols;
      for (std::size_t j = 0; j < cols; ++j) {
        if (!allow_artificial && artificial[j]) continue;
        if (d[j] > tol) {
          enter = j;
          break;
        }
      }
      if (enter == cols) return LpStatus::optimal;
      std::size_t leave = m;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m; ++i) {
        const double a = at(i, enter);
        if (a <= tol) continue;
        const double ratio = std::max(0.0, rhs(i)) / a;
        if (leave == m) {
          best = ratio;
          leave = i;
          continue;
        }
        const double slack = 1e-12 * (1.0 + std::abs(best));
        if (ratio < best - slack || (ratio <= best + slack && basis[i] < basis[leave])) {
          best = std::min(best, ratio);
          leave = i;
        }
      }
      if (leave == m) return LpStatus::unbounded;
      pivot(leave, enter);
    }
  }

  void drop_row(std::size_t r) {
    const std::size_t w = cols + 1;
    t.erase(t.begin() + static_cast<std::ptrdiff_t>(r * w),
            t.begin() + static_cast<std::ptrdiff_t>((r + 1) * w));
    basis.erase(basis.begin() + static_cast<std::ptrdiff_t>(r));
    --m;
  }

  LpResult extract(LpStatus s) {
    LpResult res;
    res.status = s;
    res.pivots = pivots;
    if (s != LpStatus::optimal) return res;
    res.x.assign(n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      if (basis[i] < n) res.x[basis[i]] = std::max(0.0, rhs(i));
    res.objective = objective_value();
    return res;
  }
};

SimplexSolver::SimplexSolver(const LinearProgram& lp, double tol) : impl_(std::make_unique<Impl>()) {
  if (lp.objective.size() != lp.num_vars) throw ContractError("objective length differs from variable count");
  if (lp.rows.size() != lp.senses.size() || lp.rows.size() != lp.rhs.size())
    throw ContractError("row, sense and rhs counts differ");
  Impl& s = *impl_;
  s.tol = tol;
  s.n = lp.num_vars;
  s.m = lp.rows.size();

  // rows with negative rhs are negated so the initial basis is feasible
  std::vector<RowSense> sense(lp.senses);
  std::vector<double> sign(s.m, 1.0);
  std::size_t n_slack = 0, n_art = 0;
  for (std::size_t i = 0; i < s.m; ++i) {
    if (lp.rhs[i] < 0.0) {
      sign[i] = -1.0;
      if (sense[i] == RowSense::le) sense[i] = RowSense::ge;
      else if (sense[i] == RowSense::ge) sense[i] = RowSense::le;
    }
    if (sense[i] != RowSense::eq) ++n_slack;
    if (sense[i] != RowSense::le) ++n_art;
  }
  s.cols = s.n + n_slack + n_art;
  s.t.assign(s.m * (s.cols + 1), 0.0);
  s.basis.assign(s.m, 0);
  s.artificial.assign(s.cols, false);
  std::size_t next_slack = s.n, next_art = s.n + n_slack;
  for (std::size_t i = 0; i < s.m; ++i) {
    for (std::size_t j = 0; j < s.n; ++j) s.at(i, j) = sign[i] * lp.rows[i][j];
    s.rhs(i) = sign[i] * lp.rhs[i];
    if (sense[i] == RowSense::le) {
      s.at(i, next_slack) = 1.0;
      s.basis[i] = next_slack++;
    } else {
      if (sense[i] == RowSense::ge) s.at(i, next_slack++) = -1.0;
      s.at(i, next_art) = 1.0;
      s.artificial[next_art] = true;
      s.basis[i] = next_art++;
    }
  }
  s.cost.assign(s.cols, 0.0);
  for (std::size_t j = 0; j < s.n; ++j) s.cost[j] = lp.objective[j];
}

SimplexSolver::~SimplexSolver() = default;
SimplexSolver::SimplexSolver(SimplexSolver&&) noexcept = default;
SimplexSolver& SimplexSolver::operator=(SimplexSolver&&) noexcept = default;

LpResult SimplexSolver::solve() {
  Impl& s = *impl_;
  if (s.solved) return reoptimize(std::vector<double>(s.cost.begin(), s.cost.begin() + s.n));
  s.solved = true;
  const std::vector<double> target_cost = s.cost;

  // phase 1: maximize -sum(artificials)
  std::vector<double> c1(s.cols, 0.0);
  bool any_art = false;
  for (std::size_t j = 0; j < s.cols; ++j)
    if (s.artificial[j]) c1[j] = -1.0, any_art = true;
  if (any_art) {
    s.price(c1);
    s.iterate(true);
    double scale = 1.0;
    for (std::size_t i = 0; i < s.m; ++i) scale = std::max(scale, std::abs(s.rhs(i)));
    if (s.objective_value() < -s.tol * scale) {
      s.feasible = false;
      return s.extract(LpStatus::infeasible);
    }
    // pivot artificials out of the basis; drop rows that are redundant
    for (std::size_t i = 0; i < s.m;) {
      if (!s.artificial[s.basis[i]]) {
        ++i;
        continue;
      }
      std::size_t c = s.cols;
      double best = s.tol;
      for (std::size_t j = 0; j < s.cols; ++j) {
        if (s.artificial[j]) continue;
        if (std::abs(s.at(i, j)) > best) best = std::abs(s.at(i, j)), c = j;
      }
      if (c == s.cols) {
        s.drop_row(i);
      } else {
        s.pivot(i, c);
        ++i;
      }
    }
  }
  s.feasible = true;
  s.price(target_cost);
  return s.extract(s.iterate(false));
}

LpResult SimplexSolver::reoptimize(std::span<const double> objective) {
  Impl& s = *impl_;
  if (objective.size() != s.n) throw ContractError("objective length differs from variable count");
  std::vector<double> c(s.cols, 0.0);
  std::copy(objective.begin(), objective.end(), c.begin());
  if (!s.solved) {
    s.cost = c;
    return solve();
  }
  if (!s.feasible) return s.extract(LpStatus::infeasible);
  s.price(c);
  return s.extract(s.iterate(false));
}

LpResult solve_lp(const LinearProgram& lp, double tol) { return SimplexSolver(lp, tol).solve(); }

}  // namespace confsa
