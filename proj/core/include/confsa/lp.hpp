#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace confsa {

enum class RowSense { le, ge, eq };

// maximize c.x  subject to  rows (sense) rhs,  x >= 0
struct LinearProgram {
  std::size_t num_vars = 0;
  std::vector<double> objective;
  std::vector<std::vector<double>> rows;
  std::vector<RowSense> senses;
  std::vector<double> rhs;

  void add_row(std::vector<double> coefficients, RowSense sense, double b);
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  double objective = 0.0;
  std::vector<double> x;
  std::size_t pivots = 0;
};

// Dense two-phase tableau simplex with Bland's rule. After a solve the
// final basis is kept, so reoptimize() with a new objective starts from it.
class SimplexSolver {
 public:
  explicit SimplexSolver(const LinearProgram& lp, double tol = 1e-8);
  ~SimplexSolver();
  SimplexSolver(SimplexSolver&&) noexcept;
  SimplexSolver& operator=(SimplexSolver&&) noexcept;

  LpResult solve();
  LpResult reoptimize(std::span<const double> objective);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

LpResult solve_lp(const LinearProgram& lp, double tol = 1e-8);

}  // namespace confsa
