#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "confsa/conformal.hpp"
#include "confsa/csa.hpp"
#include "confsa/dataset.hpp"
#include "confsa/msm.hpp"
#include "confsa/predictors.hpp"

namespace confsa {

// sum_i coefficients[i] * w_i = rhs over the calibration weights (the
// target weight does not enter).
struct BalanceConstraint {
  std::vector<double> coefficients;
  double rhs = 0.0;
  std::string label;
};

struct RangedRow {
  std::vector<double> coefficients;
  double lower = 0.0;
  double upper = 0.0;
};

// maximize sum_{i >= tail_index} w_i / sum_i w_i over lo <= w <= hi and
// the ranged rows. Variables are the n calibration weights followed by the
// target weight; rows have length n or n + 1.
struct FractionalProgram {
  std::size_t tail_index = 0;
  std::vector<WeightPair> box;
  std::vector<RangedRow> constraints;
  double tolerance = 1e-8;
};

struct FractionalResult {
  bool feasible = false;
  double value = 0.0;
  std::vector<double> weights;
};

// Charnes-Cooper transform (y = s w, s = 1 / sum w) to a linear program.
FractionalResult solve_fractional(const FractionalProgram& fp);

// Same program for a sequence of tail indices; reuses the previous optimal
// basis since only the objective changes.
class FractionalSolver {
 public:
  FractionalSolver(std::vector<WeightPair> box, std::vector<RangedRow> constraints,
                   double tolerance = 1e-8);
  ~FractionalSolver();
  FractionalSolver(FractionalSolver&&) noexcept;
  FractionalSolver& operator=(FractionalSolver&&) noexcept;

  FractionalResult solve(std::size_t tail_index);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// (1/N) sum_i T_i^t (1 - T_i)^(1-t) g_i / (e_i^t (1 - e_i)^(1-t))
double balance_rhs(std::span<const double> g, std::span<const int> treatments,
                   std::span<const double> e_hat, int t);
double balance_rhs(const ObservationalDataset& ds, std::span<const std::size_t> idx,
                   const PropensityModel& propensity,
                   const std::function<double(std::span<const double>)>& g, int t);

// Default constraint: g = e_hat over the arm-t calibration units, with
// coefficients g_i / N_t and the right-hand side from the calibration fold.
// cal_e and cal_treatments cover the whole calibration fold; the
// coefficients follow the order of its arm-t units.
BalanceConstraint propensity_balance(std::span<const double> cal_e,
                                     std::span<const int> cal_treatments, int t);

struct CssaOptions {
  double slack = 1e-6;  // relative slack on each balance equality
  double tolerance = 1e-8;
};

struct CssaResult {
  Threshold threshold = Threshold::unbounded();
  std::size_t index = 0;  // sorted position of the threshold
  bool fell_back = false;
  std::string warning;
  std::vector<std::pair<std::size_t, double>> probes;  // (J, alpha_hat_J)
};

// Binary search over score positions with one fractional program per
// probe. `sorted_scores`, bounds.units and each constraint's coefficients
// are aligned with sorted order.
CssaResult cssa_threshold(std::span<const double> sorted_scores, const WeightBounds& bounds,
                          std::span<const BalanceConstraint> constraints, double alpha,
                          const CssaOptions& opt = {});

// Exact shortcut for a single balance constraint. For each J it stores
// D(J) = max sum_i (1[i >= J] - alpha) w_i over the calibration weights
// subject to the box and the relaxed constraint, which does not depend on
// the target. A probe alpha_hat_J > alpha then reduces to
// D(J) + (1 - alpha) w_hi(target) > 0.
class CssaTable {
 public:
  CssaTable(const CsaProblem& problem, const BalanceConstraint& sorted_constraint,
            double alpha, const CssaOptions& opt = {});

  bool feasible() const { return feasible_; }
  CssaResult threshold(WeightPair target) const;

 private:
  const CsaProblem* problem_;
  double alpha_;
  bool feasible_ = true;
  std::vector<double> d_;
};

// Sorted-order constraint for a CsaProblem from per-unit coefficients.
BalanceConstraint sort_constraint(const CsaProblem& problem, const BalanceConstraint& per_unit);

}  // namespace confsa
