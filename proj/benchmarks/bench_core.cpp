#include <benchmark/benchmark.h>

#include <algorithm>
#include <random>

#include "confsa/conformal.hpp"
#include "confsa/csa.hpp"
#include "confsa/cssa.hpp"
#include "confsa/msm.hpp"
#include "confsa/random.hpp"

using namespace confsa;

namespace {

struct Calib {
  std::vector<double> scores;
  std::vector<double> e;
};

Calib make_calib(std::size_t n) {
  Rng rng = make_rng(11);
  std::exponential_distribution<double> ex;
  std::uniform_real_distribution<double> u(0.25, 0.5);
  Calib c;
  for (std::size_t i = 0; i < n; ++i) {
    c.scores.push_back(ex(rng));
    c.e.push_back(u(rng));
  }
  return c;
}

void BM_WeightedQuantile(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Calib c = make_calib(n);
  for (auto _ : state) {
    WeightedDiscreteDist d(c.scores, c.e, 0.3);
    benchmark::DoNotOptimize(weighted_quantile(d, 0.8));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_WeightedQuantile)->RangeMultiplier(4)->Range(256, 16384)->Complexity();

void BM_GreedyMaxQuantile(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Calib c = make_calib(n);
  std::sort(c.scores.begin(), c.scores.end());
  WeightBounds b;
  for (double e : c.e) b.units.push_back(weight_bounds_same_arm(e, 2.0, 1, 0.35));
  b.target = weight_bounds_same_arm(0.3, 2.0, 1, 0.35);
  for (auto _ : state) benchmark::DoNotOptimize(greedy_max_quantile(c.scores, b, 0.2));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_GreedyMaxQuantile)->RangeMultiplier(4)->Range(256, 16384)->Complexity();

void BM_CsaProblemThreshold(benchmark::State& state) {
  const Calib c = make_calib(static_cast<std::size_t>(state.range(0)));
  const CsaProblem p = make_same_arm_problem(c.scores, c.e, 2.0, 1, 0.35);
  const WeightPair target = weight_bounds_same_arm(0.3, 2.0, 1, 0.35);
  for (auto _ : state) benchmark::DoNotOptimize(p.threshold(target, 0.2));
}
BENCHMARK(BM_CsaProblemThreshold)->Arg(500)->Arg(5000);

void BM_FractionalProgram(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Calib c = make_calib(n);
  FractionalProgram fp;
  std::vector<double> a;
  double rhs = 0.0;
  for (double e : c.e) {
    fp.box.push_back(weight_bounds_same_arm(e, 2.0, 1, 0.35));
    a.push_back(e / static_cast<double>(n));
    rhs += e / static_cast<double>(n) * (1.0 - e) / e;
  }
  fp.box.push_back(weight_bounds_same_arm(0.3, 2.0, 1, 0.35));
  fp.constraints.push_back({a, rhs * 0.999, rhs * 1.001});
  fp.tail_index = n * 4 / 5;
  for (auto _ : state) benchmark::DoNotOptimize(solve_fractional(fp));
}
BENCHMARK(BM_FractionalProgram)->Arg(50)->Arg(200);

void BM_CssaTable(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Calib c = make_calib(n);
  const CsaProblem p = make_same_arm_problem(c.scores, c.e, 2.0, 1, 0.35);
  const std::vector<int> t(n, 1);
  const BalanceConstraint con = sort_constraint(p, propensity_balance(c.e, t, 1));
  for (auto _ : state) {
    CssaTable table(p, con, 0.2);
    benchmark::DoNotOptimize(table.threshold(weight_bounds_same_arm(0.3, 2.0, 1, 0.35)));
  }
}
BENCHMARK(BM_CssaTable)->Arg(500)->Arg(5000);

}  // namespace

BENCHMARK_MAIN();
