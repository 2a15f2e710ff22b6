#include <gtest/gtest.h>

#include <random>

#include "confsa/csa.hpp"
#include "confsa/cssa.hpp"
#include "confsa/error.hpp"
#include "confsa/oracle.hpp"
#include "confsa/random.hpp"
#include "support/oracles.hpp"

using namespace confsa;

namespace {

struct Calib {
  std::vector<double> scores;  // sorted
  std::vector<double> e;       // aligned with scores
  double p_t = 0.5;
};

Calib random_calib(Rng& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.1, 0.9);
  std::exponential_distribution<double> ex;
  Calib c;
  for (std::size_t i = 0; i < n; ++i) c.scores.push_back(ex(rng));
  std::sort(c.scores.begin(), c.scores.end());
  for (std::size_t i = 0; i < n; ++i) c.e.push_back(u(rng));
  c.p_t = 0.3 + 0.4 * u(rng);
  return c;
}

WeightBounds same_arm(const Calib& c, double gamma, double et) {
  WeightBounds b;
  for (double e : c.e) b.units.push_back(weight_bounds_same_arm(e, gamma, 1, c.p_t));
  b.target = weight_bounds_same_arm(et, gamma, 1, c.p_t);
  return b;
}

// g = e_hat balance with the right-hand side taken from a fold holding the
// calibration units plus `controls` control units; p_t becomes the arm
// fraction of that fold
BalanceConstraint e_balance(Calib& c, std::size_t controls, Rng& rng) {
  c.p_t = double(c.e.size()) / double(c.e.size() + controls);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  std::vector<double> e = c.e;
  std::vector<int> t(c.e.size(), 1);
  for (std::size_t i = 0; i < controls; ++i) e.push_back(u(rng)), t.push_back(0);
  return propensity_balance(e, t, 1);
}

}  // namespace

TEST(BalanceRhs, HandInstance) {
  const std::vector<double> g{2, 4}, e{0.5, 0.5};
  const std::vector<int> t{1, 0};
  EXPECT_DOUBLE_EQ(balance_rhs(g, t, e, 1), 2.0);
  const std::vector<double> zero{0, 0};
  EXPECT_DOUBLE_EQ(balance_rhs(zero, t, e, 1), 0.0);
}

TEST(BalanceRhs, HorvitzThompsonNearOne) {
  const SyntheticDGP dgp;
  const GeneratedData g = generate(dgp, 2000, 3);
  std::vector<double> ones(g.data.size(), 1.0), e;
  for (std::size_t i = 0; i < g.data.size(); ++i) e.push_back(TruthAccess::unit(g.truth, i).propensity);
  EXPECT_NEAR(balance_rhs(ones, g.data.treatments(), e, 1), 1.0, 0.05);
  EXPECT_NEAR(balance_rhs(ones, g.data.treatments(), e, 0), 1.0, 0.05);
}

TEST(Fractional, TopAtomMatchesMinMiscoverage) {
  Rng rng = make_rng(31);
  for (int rep = 0; rep < 20; ++rep) {
    const Calib c = random_calib(rng, 6);
    const double et = 0.4, gamma = 1.0 + rep * 0.3;
    const WeightBounds b = same_arm(c, gamma, et);
    FractionalProgram fp;
    fp.box = b.units;
    fp.box.push_back(b.target);
    fp.tail_index = c.scores.size();
    const auto r = solve_fractional(fp);
    ASSERT_TRUE(r.feasible);
    EXPECT_NEAR(r.value, min_miscoverage(c.e, et, gamma, 1, c.p_t), 1e-9);
    fp.tail_index = 0;
    EXPECT_NEAR(solve_fractional(fp).value, 1.0, 1e-12);
  }
}

TEST(Fractional, ThreeVariableDenseGrid) {
  // two calibration weights and the target, with w0 + 2 w1 = 2.5
  const std::vector<WeightPair> box{{0.5, 1.5}, {0.4, 1.2}, {0.6, 2.0}};
  const std::vector<double> a{1.0, 2.0};
  const double rhs = 2.5;
  for (std::size_t tail : {1u, 2u}) {
    FractionalProgram fp;
    fp.box = box;
    fp.tail_index = tail;
    fp.constraints.push_back({a, rhs, rhs});
    const auto r = solve_fractional(fp);
    ASSERT_TRUE(r.feasible);
    double best = -1.0;
    for (int i = 0; i <= 1000; ++i) {
      const double w0 = 0.5 + i * 1e-3;
      const double w1 = (rhs - w0) / 2.0;
      if (w1 < 0.4 || w1 > 1.2) continue;
      for (int k = 0; k <= 1400; ++k) {
        const double w2 = 0.6 + k * 1e-3;
        const double w[3] = {w0, w1, w2};
        double num = 0.0;
        for (std::size_t j = tail; j < 3; ++j) num += w[j];
        best = std::max(best, num / (w0 + w1 + w2));
      }
    }
    EXPECT_NEAR(r.value, best, 2e-3) << "tail " << tail;
    double sum = 0.0;
    for (std::size_t j = 0; j < 2; ++j) sum += a[j] * r.weights[j];
    EXPECT_NEAR(sum, rhs, 1e-7);
  }
}

TEST(Fractional, InfeasibleConstraint) {
  FractionalProgram fp;
  fp.box = {{1, 2}, {1, 2}};
  fp.tail_index = 1;
  fp.constraints.push_back({{1.0, 1.0}, 10.0, 10.0});
  EXPECT_FALSE(solve_fractional(fp).feasible);
}

TEST(Fractional, ProbesNonincreasing) {
  Rng rng = make_rng(32);
  for (int rep = 0; rep < 20; ++rep) {
    Calib c = random_calib(rng, 12);
    const BalanceConstraint bc = e_balance(c, 12, rng);
    const WeightBounds b = same_arm(c, 2.5, 0.5);
    std::vector<WeightPair> box = b.units;
    box.push_back(b.target);
    const double s = 1e-6 * std::abs(bc.rhs);
    FractionalSolver solver(box, {{bc.coefficients, bc.rhs - s, bc.rhs + s}});
    double prev = 2.0;
    for (std::size_t j = 0; j <= c.scores.size(); ++j) {
      const auto r = solver.solve(j);
      if (!r.feasible) break;
      EXPECT_LE(r.value, prev + 1e-9);
      prev = r.value;
    }
  }
}

TEST(Cssa, NoConstraintsEqualsGreedy) {
  Rng rng = make_rng(33);
  for (int rep = 0; rep < 50; ++rep) {
    const Calib c = random_calib(rng, 20);
    const WeightBounds b = same_arm(c, 3.0, 0.3);
    const auto r = cssa_threshold(c.scores, b, {}, 0.2);
    EXPECT_EQ(r.threshold, greedy_max_quantile(c.scores, b, 0.2).threshold);
  }
}

TEST(Cssa, GammaOneEqualsWeightedConformal) {
  Rng rng = make_rng(34);
  for (int rep = 0; rep < 20; ++rep) {
    Calib c = random_calib(rng, 40);
    const BalanceConstraint bc = e_balance(c, 25, rng);
    const WeightBounds b = same_arm(c, 1.0, 0.6);
    const auto wcp = wcp_interval_nuc(c.scores, c.e, ScoreCenter::mean(0.0), 0.6, 0.2, 1, c.p_t);
    const std::vector<BalanceConstraint> cons{bc};
    const auto r = cssa_threshold(c.scores, b, cons, 0.2);
    EXPECT_FALSE(r.fell_back) << r.warning;
    EXPECT_EQ(r.threshold, wcp.threshold);
  }
}

TEST(Cssa, TableMatchesSimplexRoute) {
  Rng rng = make_rng(35);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  int sharper = 0;
  for (int rep = 0; rep < 60; ++rep) {
    Calib c = random_calib(rng, 10 + rep % 30);
    const double gamma = 1.0 + rep % 5;
    const BalanceConstraint bc = e_balance(c, 15, rng);
    std::vector<WeightPair> per_unit;
    for (double e : c.e) per_unit.push_back(weight_bounds_same_arm(e, gamma, 1, c.p_t));
    // CsaProblem sorts stably; the scores are sorted already
    const CsaProblem prob(c.scores, per_unit);
    const CssaTable table(prob, sort_constraint(prob, bc), 0.2);
    for (int k = 0; k < 3; ++k) {
      const WeightPair tb = weight_bounds_same_arm(u(rng), gamma, 1, c.p_t);
      const std::vector<BalanceConstraint> cons{bc};
      const auto lp = cssa_threshold(c.scores, {per_unit, tb}, cons, 0.2);
      const auto fast = table.threshold(tb);
      EXPECT_EQ(lp.fell_back, fast.fell_back);
      EXPECT_EQ(lp.threshold, fast.threshold) << "instance " << rep;
      EXPECT_LE(fast.threshold, prob.threshold(tb, 0.2));
      sharper += fast.threshold < prob.threshold(tb, 0.2);
    }
  }
  EXPECT_GT(sharper, 0);
}

TEST(Cssa, BelowCsaAndWithinOneAtomOfVertexOracle) {
  Rng rng = make_rng(36);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  for (int rep = 0; rep < 100; ++rep) {
    Calib c = random_calib(rng, 5);
    const double gamma = 2.0 + rep % 3, alpha = 0.15 + 0.2 * u(rng);
    const BalanceConstraint bc = e_balance(c, 5, rng);
    const WeightBounds b = same_arm(c, gamma, u(rng));
    const std::vector<BalanceConstraint> cons{bc};
    const auto r = cssa_threshold(c.scores, b, cons, alpha);
    const Threshold csa = greedy_max_quantile(c.scores, b, alpha).threshold;
    EXPECT_LE(r.threshold, csa);

    // oracle: last J whose exact maximal tail mass exceeds alpha
    std::vector<WeightPair> box = b.units;
    box.push_back(b.target);
    std::vector<double> a = bc.coefficients;
    a.push_back(0.0);
    std::size_t J = 0;
    for (std::size_t j = 1; j <= c.scores.size(); ++j) {
      bool feasible = false;
      if (confsa::testing::vertex_fractional_max(box, a, bc.rhs, j, feasible) > alpha) J = j;
      ASSERT_TRUE(feasible);
    }
    const auto idx = static_cast<long>(r.index);
    EXPECT_LE(std::abs(idx - static_cast<long>(J)), 1) << "instance " << rep;
  }
}

TEST(Cssa, InfeasibleFallsBackWithWarning) {
  const std::vector<double> s{1, 2, 3};
  WeightBounds b{{{1, 2}, {1, 2}, {1, 2}}, {1, 2}};
  const std::vector<BalanceConstraint> cons{{{1, 1, 1}, 100.0, "impossible"}};
  const auto r = cssa_threshold(s, b, cons, 0.3);
  EXPECT_TRUE(r.fell_back);
  EXPECT_FALSE(r.warning.empty());
  EXPECT_EQ(r.threshold, greedy_max_quantile(s, b, 0.3).threshold);
}
