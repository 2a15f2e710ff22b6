#include "confsa/cssa.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "confsa/error.hpp"
#include "confsa/lp.hpp"

namespace confsa {

struct FractionalSolver::Impl {
  std::size_t n = 0;  // weights, target last
  SimplexSolver lp;
  bool started = false;

  Impl(std::size_t n_, const LinearProgram& prog, double tol) : n(n_), lp(prog, tol) {}
};

namespace {

// Variables y_0..y_{n-1} then s; w = y / s.
LinearProgram charnes_cooper(const std::vector<WeightPair>& box,
                             const std::vector<RangedRow>& constraints) {
  const std::size_t n = box.size();
  LinearProgram p;
  p.num_vars = n + 1;
  p.objective.assign(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> r(n + 1, 0.0);
    r[i] = 1.0;
    r[n] = -box[i].lo;
    p.add_row(r, RowSense::ge, 0.0);
    r[n] = -box[i].hi;
    p.add_row(std::move(r), RowSense::le, 0.0);
  }
  std::vector<double> sum(n + 1, 1.0);
  sum[n] = 0.0;
  p.add_row(std::move(sum), RowSense::eq, 1.0);
  for (const auto& c : constraints) {
    if (c.coefficients.size() != n && c.coefficients.size() + 1 != n)
      throw ContractError("constraint length must match the calibration or full weight count");
    if (!(c.lower <= c.upper)) throw ContractError("constraint range is empty");
    std::vector<double> r(n + 1, 0.0);
    std::copy(c.coefficients.begin(), c.coefficients.end(), r.begin());
    if (c.lower == c.upper) {
      r[n] = -c.lower;
      p.add_row(std::move(r), RowSense::eq, 0.0);
      continue;
    }
    r[n] = -c.lower;
    p.add_row(r, RowSense::ge, 0.0);
    r[n] = -c.upper;
    p.add_row(std::move(r), RowSense::le, 0.0);
  }
  return p;
}

}  // namespace

FractionalSolver::FractionalSolver(std::vector<WeightPair> box, std::vector<RangedRow> constraints,
                                   double tolerance) {
  if (box.empty()) throw ContractError("fractional program needs at least one variable");
  for (const auto& b : box)
    if (!(b.lo > 0.0 && b.lo <= b.hi)) throw ContractError("weight boxes need 0 < lo <= hi");
  if (!(tolerance > 0.0)) throw ContractError("tolerance must be positive");
  impl_ = std::make_unique<Impl>(box.size(), charnes_cooper(box, constraints), tolerance);
}

FractionalSolver::~FractionalSolver() = default;
FractionalSolver::FractionalSolver(FractionalSolver&&) noexcept = default;
FractionalSolver& FractionalSolver::operator=(FractionalSolver&&) noexcept = default;

FractionalResult FractionalSolver::solve(std::size_t tail_index) {
  Impl& s = *impl_;
  if (tail_index > s.n) throw ContractError("tail index out of range");
  std::vector<double> c(s.n + 1, 0.0);
  for (std::size_t i = tail_index; i < s.n; ++i) c[i] = 1.0;
  LpResult r = s.lp.reoptimize(c);
  FractionalResult out;
  if (r.status != LpStatus::optimal) return out;
  out.feasible = true;
  out.value = std::clamp(r.objective, 0.0, 1.0);
  const double sc = r.x[s.n];
  out.weights.resize(s.n);
  for (std::size_t i = 0; i < s.n; ++i) out.weights[i] = r.x[i] / sc;
  return out;
}

FractionalResult solve_fractional(const FractionalProgram& fp) {
  FractionalSolver solver(fp.box, fp.constraints, fp.tolerance);
  return solver.solve(fp.tail_index);
}

double balance_rhs(std::span<const double> g, std::span<const int> treatments,
                   std::span<const double> e_hat, int t) {
  if (g.size() != treatments.size() || g.size() != e_hat.size())
    throw ContractError("balance inputs differ in length");
  if (g.empty()) throw ContractError("empty sample");
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (treatments[i] != t) continue;
    s += g[i] / (t == 1 ? e_hat[i] : 1.0 - e_hat[i]);
  }
  return s / static_cast<double>(g.size());
}

double balance_rhs(const ObservationalDataset& ds, std::span<const std::size_t> idx,
                   const PropensityModel& propensity,
                   const std::function<double(std::span<const double>)>& g, int t) {
  std::vector<double> gv(idx.size()), e(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto& x = ds[idx[i]].covariates;
    gv[i] = g(x);
    e[i] = propensity.predict(x);
  }
  return balance_rhs(gv, ds.treatments(idx), e, t);
}

BalanceConstraint propensity_balance(std::span<const double> cal_e,
                                     std::span<const int> cal_treatments, int t) {
  BalanceConstraint c;
  c.label = "propensity";
  c.rhs = balance_rhs(cal_e, cal_treatments, cal_e, t);
  for (std::size_t i = 0; i < cal_e.size(); ++i)
    if (cal_treatments[i] == t) c.coefficients.push_back(cal_e[i]);
  const double nt = static_cast<double>(c.coefficients.size());
  if (nt == 0.0) throw ContractError("no calibration units in the arm");
  for (double& v : c.coefficients) v /= nt;
  return c;
}

namespace {

RangedRow relax(const BalanceConstraint& c, double slack) {
  const double s = slack * std::abs(c.rhs);
  return {c.coefficients, c.rhs - s, c.rhs + s};
}

}  // namespace

CssaResult cssa_threshold(std::span<const double> sorted_scores, const WeightBounds& bounds,
                          std::span<const BalanceConstraint> constraints, double alpha,
                          const CssaOptions& opt) {
  const GreedyResult g = greedy_max_quantile(sorted_scores, bounds, alpha);
  CssaResult out;
  out.threshold = g.threshold;
  out.index = g.flip_index;
  if (constraints.empty()) return out;

  const std::size_t n = sorted_scores.size();
  std::vector<WeightPair> box(bounds.units);
  box.push_back(bounds.target);
  std::vector<RangedRow> rows;
  for (const auto& c : constraints) {
    if (c.coefficients.size() != n) throw ContractError("constraint length must match the calibration size");
    rows.push_back(relax(c, opt.slack));
  }
  FractionalSolver solver(std::move(box), std::move(rows), opt.tolerance);
  if (!solver.solve(0).feasible) {
    out.fell_back = true;
    out.warning = "balance constraints are infeasible; using the unconstrained threshold";
    return out;
  }
  // alpha_hat_0 = 1 > alpha, and alpha_hat_{m+1} <= alpha since the box
  // alone already keeps it there; keep the last J with alpha_hat_J > alpha
  const double cut = alpha + kQuantileTol;
  std::size_t lo = 0, hi = g.flip_index + 1;
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    const FractionalResult r = solver.solve(mid);
    out.probes.emplace_back(mid, r.value);
    if (r.value > cut) lo = mid;
    else hi = mid;
  }
  out.index = lo;
  out.threshold = lo == n ? Threshold::unbounded() : Threshold::finite(sorted_scores[lo]);
  return out;
}

namespace {

// max c.w over lo <= w <= hi with lower <= a.w <= upper, by moving the
// cheapest items (loss per unit of a.w) away from the box optimum.
bool continuous_knapsack(std::span<const double> c, std::span<const double> a,
                         std::span<const WeightPair> box, double lower, double upper,
                         double& value) {
  const std::size_t n = c.size();
  std::vector<double> w(n);
  double A = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (c[i] > 0.0) w[i] = box[i].hi;
    else if (c[i] < 0.0) w[i] = box[i].lo;
    else w[i] = a[i] >= 0.0 ? box[i].lo : box[i].hi;  // free items start at the low end of a.w
    A += a[i] * w[i];
  }
  const double tol = 1e-12 * std::max({1.0, std::abs(lower), std::abs(upper)});
  if (A > upper || A < lower) {
    const bool decrease = A > upper;
    struct Move {
      double rate;
      double capacity;
      std::size_t i;
    };
    std::vector<Move> moves;
    for (std::size_t i = 0; i < n; ++i) {
      if (a[i] == 0.0) continue;
      const bool up = (a[i] > 0.0) != decrease;  // direction of w_i that moves a.w the right way
      const double room = up ? box[i].hi - w[i] : w[i] - box[i].lo;
      if (room <= 0.0) continue;
      const double rate = (decrease ? c[i] : -c[i]) / a[i];
      moves.push_back({rate, room * std::abs(a[i]), i});
    }
    std::sort(moves.begin(), moves.end(), [](const Move& x, const Move& y) {
      return x.rate < y.rate || (x.rate == y.rate && x.i < y.i);
    });
    double need = decrease ? A - upper : lower - A;
    for (const auto& mv : moves) {
      if (need <= 0.0) break;
      const double take = std::min(need, mv.capacity);
      const double dw = take / std::abs(a[mv.i]);
      const bool up = (a[mv.i] > 0.0) != decrease;
      w[mv.i] += up ? dw : -dw;
      need -= take;
    }
    if (need > tol) return false;
  }
  value = 0.0;
  for (std::size_t i = 0; i < n; ++i) value += c[i] * w[i];
  return true;
}

}  // namespace

CssaTable::CssaTable(const CsaProblem& problem, const BalanceConstraint& sorted_constraint,
                     double alpha, const CssaOptions& opt)
    : problem_(&problem), alpha_(alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ContractError("alpha must be in (0, 1)");
  const std::size_t n = problem.size();
  if (sorted_constraint.coefficients.size() != n)
    throw ContractError("constraint length must match the calibration size");
  const RangedRow row = relax(sorted_constraint, opt.slack);
  const double cut = alpha + kQuantileTol;
  std::vector<double> c(n);
  d_.resize(n + 1);
  for (std::size_t j = 0; j <= n; ++j) {
    for (std::size_t i = 0; i < n; ++i) c[i] = (i >= j ? 1.0 : 0.0) - cut;
    if (!continuous_knapsack(c, row.coefficients, problem.sorted_bounds(), row.lower, row.upper,
                             d_[j])) {
      feasible_ = false;  // the feasible set does not depend on j
      d_.clear();
      return;
    }
  }
}

CssaResult CssaTable::threshold(WeightPair target) const {
  const std::size_t m = problem_->stop_index(target, alpha_);
  CssaResult out;
  out.index = m;
  out.threshold = problem_->scores().at(m);
  if (!feasible_) {
    out.fell_back = true;
    out.warning = "balance constraints are infeasible; using the unconstrained threshold";
    return out;
  }
  const double tail = (1.0 - (alpha_ + kQuantileTol)) * target.hi;
  std::size_t lo = 0, hi = m + 1;
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    const double excess = d_[mid] + tail;
    out.probes.emplace_back(mid, excess);  // sign matches alpha_hat - alpha
    if (excess > 0.0) lo = mid;
    else hi = mid;
  }
  out.index = lo;
  out.threshold = problem_->scores().at(lo);
  return out;
}

BalanceConstraint sort_constraint(const CsaProblem& problem, const BalanceConstraint& per_unit) {
  if (per_unit.coefficients.size() != problem.size())
    throw ContractError("constraint length must match the calibration size");
  BalanceConstraint out = per_unit;
  out.coefficients = problem.scores().permute(std::span<const double>(per_unit.coefficients));
  return out;
}

}  // namespace confsa
