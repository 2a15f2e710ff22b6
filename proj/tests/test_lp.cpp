#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_int.hpp>
#include <optional>
#include <random>

#include "confsa/lp.hpp"
#include "confsa/random.hpp"

using namespace confsa;
using Rational = boost::multiprecision::cpp_rational;

namespace {

struct IntLp {
  std::size_t n = 0;
  std::vector<int> c;
  std::vector<std::vector<int>> a;
  std::vector<RowSense> sense;
  std::vector<int> b;

  LinearProgram to_double() const {
    LinearProgram lp;
    lp.num_vars = n;
    lp.objective.assign(c.begin(), c.end());
    for (std::size_t r = 0; r < a.size(); ++r)
      lp.add_row(std::vector<double>(a[r].begin(), a[r].end()), sense[r], b[r]);
    return lp;
  }
};

// Solves the square system M x = r exactly; nullopt when singular.
std::optional<std::vector<Rational>> solve_exact(std::vector<std::vector<Rational>> M, std::vector<Rational> r) {
  const std::size_t n = r.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    while (piv < n && M[piv][col] == 0) ++piv;
    if (piv == n) return std::nullopt;
    std::swap(M[piv], M[col]);
    std::swap(r[piv], r[col]);
    for (std::size_t i = 0; i < n; ++i) {
      if (i == col || M[i][col] == 0) continue;
      const Rational f = M[i][col] / M[col][col];
      for (std::size_t j = col; j < n; ++j) M[i][j] -= f * M[col][j];
      r[i] -= f * r[col];
    }
  }
  for (std::size_t i = 0; i < n; ++i) r[i] /= M[i][i];
  return r;
}

// Best vertex by enumeration of every n-subset of tight constraints. The
// feasible set must be bounded.
std::optional<Rational> vertex_oracle(const IntLp& lp) {
  const std::size_t n = lp.n, m = lp.a.size();
  std::vector<std::vector<Rational>> rows;  // all constraints incl. x_j >= 0
  std::vector<Rational> rhs;
  for (std::size_t r = 0; r < m; ++r) {
    rows.emplace_back(lp.a[r].begin(), lp.a[r].end());
    rhs.emplace_back(lp.b[r]);
  }
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<Rational> e(n, 0);
    e[j] = 1;
    rows.push_back(e);
    rhs.emplace_back(0);
  }
  const std::size_t total = rows.size();
  std::optional<Rational> best;
  std::vector<std::size_t> pick(n);
  for (std::size_t mask = 0; mask < (std::size_t{1} << total); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcountll(mask)) != n) continue;
    std::vector<std::vector<Rational>> M;
    std::vector<Rational> r;
    for (std::size_t k = 0; k < total; ++k)
      if (mask >> k & 1) M.push_back(rows[k]), r.push_back(rhs[k]);
    const auto x = solve_exact(M, r);
    if (!x) continue;
    bool ok = true;
    for (std::size_t j = 0; j < n && ok; ++j) ok = (*x)[j] >= 0;
    for (std::size_t k = 0; k < m && ok; ++k) {
      Rational s = 0;
      for (std::size_t j = 0; j < n; ++j) s += rows[k][j] * (*x)[j];
      if (lp.sense[k] == RowSense::le) ok = s <= rhs[k];
      else if (lp.sense[k] == RowSense::ge) ok = s >= rhs[k];
      else ok = s == rhs[k];
    }
    if (!ok) continue;
    Rational obj = 0;
    for (std::size_t j = 0; j < n; ++j) obj += Rational(lp.c[j]) * (*x)[j];
    if (!best || obj > *best) best = obj;
  }
  return best;
}

}  // namespace

TEST(Simplex, TextbookMaximum) {
  // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> 36 at (2, 6)
  LinearProgram lp;
  lp.num_vars = 2;
  lp.objective = {3, 5};
  lp.add_row({1, 0}, RowSense::le, 4);
  lp.add_row({0, 2}, RowSense::le, 12);
  lp.add_row({3, 2}, RowSense::le, 18);
  const auto r = solve_lp(lp);
  ASSERT_EQ(r.status, LpStatus::optimal);
  EXPECT_NEAR(r.objective, 36, 1e-9);
  EXPECT_NEAR(r.x[0], 2, 1e-9);
  EXPECT_NEAR(r.x[1], 6, 1e-9);
}

TEST(Simplex, InfeasibleAndUnbounded) {
  LinearProgram a;
  a.num_vars = 1;
  a.objective = {1};
  a.add_row({1}, RowSense::le, 1);
  a.add_row({1}, RowSense::ge, 2);
  EXPECT_EQ(solve_lp(a).status, LpStatus::infeasible);
  LinearProgram b;
  b.num_vars = 2;
  b.objective = {1, 0};
  b.add_row({1, -1}, RowSense::le, 1);
  EXPECT_EQ(solve_lp(b).status, LpStatus::unbounded);
}

TEST(Simplex, DegenerateCyclingExample) {
  // a classic instance on which the textbook pivot rule cycles
  LinearProgram lp;
  lp.num_vars = 4;
  lp.objective = {0.75, -150, 0.02, -6};
  lp.add_row({0.25, -60, -0.04, 9}, RowSense::le, 0);
  lp.add_row({0.5, -90, -0.02, 3}, RowSense::le, 0);
  lp.add_row({0, 0, 1, 0}, RowSense::le, 1);
  const auto r = solve_lp(lp);
  ASSERT_EQ(r.status, LpStatus::optimal);
  EXPECT_NEAR(r.objective, 0.05, 1e-9);
}

TEST(Simplex, EqualityAndRedundantRows) {
  LinearProgram lp;
  lp.num_vars = 3;
  lp.objective = {1, 2, 3};
  lp.add_row({1, 1, 1}, RowSense::eq, 1);
  lp.add_row({2, 2, 2}, RowSense::eq, 2);  // redundant copy
  lp.add_row({0, 0, 1}, RowSense::le, 0.5);
  const auto r = solve_lp(lp);
  ASSERT_EQ(r.status, LpStatus::optimal);
  EXPECT_NEAR(r.objective, 2.5, 1e-9);
}

TEST(Simplex, ReoptimizeMatchesFreshSolve) {
  Rng rng = make_rng(21);
  std::uniform_int_distribution<int> coef(-4, 6);
  for (int rep = 0; rep < 100; ++rep) {
    LinearProgram lp;
    lp.num_vars = 4;
    lp.objective = {1, 1, 1, 1};
    lp.add_row({1, 1, 1, 1}, RowSense::le, 10);
    lp.add_row({double(coef(rng)), double(coef(rng)), 1, 0}, RowSense::ge, -2);
    lp.add_row({1, double(coef(rng)), 0, double(coef(rng))}, RowSense::le, 5);
    SimplexSolver s(lp);
    const auto first = s.solve();
    ASSERT_EQ(first.status, LpStatus::optimal);
    for (int k = 0; k < 3; ++k) {
      std::vector<double> c{double(coef(rng)), double(coef(rng)), double(coef(rng)), double(coef(rng))};
      LinearProgram fresh = lp;
      fresh.objective = c;
      EXPECT_NEAR(s.reoptimize(c).objective, solve_lp(fresh).objective, 1e-8);
    }
  }
}

TEST(Simplex, MatchesRationalVertexOracle) {
  Rng rng = make_rng(22);
  std::uniform_int_distribution<int> coef(-5, 5), rhs(-6, 10), nv(1, 3), nr(1, 3), sense(0, 2);
  int infeasible = 0;
  for (int rep = 0; rep < 500; ++rep) {
    IntLp lp;
    lp.n = nv(rng);
    for (std::size_t j = 0; j < lp.n; ++j) lp.c.push_back(coef(rng));
    const int rows = nr(rng);
    for (int r = 0; r < rows; ++r) {
      std::vector<int> a(lp.n);
      for (auto& v : a) v = coef(rng);
      lp.a.push_back(a);
      lp.sense.push_back(static_cast<RowSense>(sense(rng)));
      lp.b.push_back(rhs(rng));
    }
    lp.a.push_back(std::vector<int>(lp.n, 1));  // keeps the feasible set bounded
    lp.sense.push_back(RowSense::le);
    lp.b.push_back(12);

    const auto oracle = vertex_oracle(lp);
    const auto got = solve_lp(lp.to_double());
    if (!oracle) {
      ++infeasible;
      EXPECT_EQ(got.status, LpStatus::infeasible) << "instance " << rep;
      continue;
    }
    ASSERT_EQ(got.status, LpStatus::optimal) << "instance " << rep;
    EXPECT_NEAR(got.objective, oracle->convert_to<double>(), 1e-7) << "instance " << rep;
  }
  EXPECT_GT(infeasible, 10);
}
