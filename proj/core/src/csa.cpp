#include "confsa/csa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "confsa/error.hpp"

namespace confsa {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ContractError("alpha must be in (0, 1)");
}

void check_pair(const WeightPair& w) {
  if (!(w.lo > 0.0 && w.lo <= w.hi) || !std::isfinite(w.hi))
    throw ContractError("weight bounds need 0 < lo <= hi < inf");
}

}  // namespace

GreedyResult greedy_max_quantile(std::span<const double> sorted_scores, const WeightBounds& bounds,
                                 double alpha) {
  const std::size_t n = sorted_scores.size();
  if (bounds.units.size() != n) throw ContractError("scores and weight bounds are misaligned");
  check_alpha(alpha);
  if (!std::is_sorted(sorted_scores.begin(), sorted_scores.end()))
    throw ContractError("scores must be sorted ascending");
  for (const auto& w : bounds.units) check_pair(w);
  check_pair(bounds.target);

  auto lo = [&](std::size_t i) { return i == n ? bounds.target.lo : bounds.units[i].lo; };
  auto hi = [&](std::size_t i) { return i == n ? bounds.target.hi : bounds.units[i].hi; };

  GreedyResult r;
  r.weights.resize(n + 1);
  double total = 0.0;
  for (std::size_t i = 0; i <= n; ++i) total += r.weights[i] = lo(i);

  // flip from the sentinel downward; the first flip precedes the first test
  const double cut = alpha + kQuantileTol;
  double tail = 0.0;
  std::size_t k = n;
  for (;;) {
    total += hi(k) - lo(k);
    tail += hi(k);
    r.weights[k] = hi(k);
    ++r.iterations;
    if (tail > cut * total || k == 0) break;
    --k;
  }
  r.flip_index = k;
  r.threshold = k == n ? Threshold::unbounded() : Threshold::finite(sorted_scores[k]);
  return r;
}

CsaProblem::CsaProblem(std::span<const double> scores, std::span<const WeightPair> bounds)
    : scores_(std::vector<double>(scores.begin(), scores.end())) {
  if (scores.size() != bounds.size()) throw ContractError("scores and weight bounds are misaligned");
  if (scores.empty()) throw ContractError("empty calibration set");
  for (const auto& w : bounds) check_pair(w);
  bounds_ = scores_.permute(bounds);
  const std::size_t n = bounds_.size();
  prefix_lo_.assign(n + 1, 0.0);
  suffix_hi_.assign(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix_lo_[i + 1] = prefix_lo_[i] + bounds_[i].lo;
  for (std::size_t i = n; i-- > 0;) suffix_hi_[i] = suffix_hi_[i + 1] + bounds_[i].hi;
}

std::size_t CsaProblem::stop_index(WeightPair target, double alpha) const {
  check_alpha(alpha);
  check_pair(target);
  const double cut = alpha + kQuantileTol;
  // tail share after flipping positions k..n grows as k decreases
  auto exceeds = [&](std::size_t k) {
    const double tail = suffix_hi_[k] + target.hi;
    return tail > cut * (prefix_lo_[k] + tail);
  };
  const std::size_t n = size();
  if (exceeds(n)) return n;
  std::size_t lo = 0, hi = n;  // exceeds(lo) holds (or lo == 0), exceeds(hi) fails
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (exceeds(mid)) lo = mid;
    else hi = mid;
  }
  return lo;
}

Threshold CsaProblem::threshold(WeightPair target, double alpha) const {
  return scores_.at(stop_index(target, alpha));
}

PredictiveInterval csa_interval(const CsaProblem& problem, const ScoreCenter& target,
                                WeightPair target_bounds, double alpha) {
  const std::size_t k = problem.stop_index(target_bounds, alpha);
  PredictiveInterval out = assemble_interval(target, problem.scores().at(k));
  out.flip_index = k;
  return out;
}

CsaProblem make_same_arm_problem(std::span<const double> scores, std::span<const double> cal_e,
                                 double gamma, int t, double p_t) {
  if (scores.size() != cal_e.size()) throw ContractError("scores and propensities differ in length");
  std::vector<WeightPair> b(scores.size());
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = weight_bounds_same_arm(cal_e[i], gamma, t, p_t);
  return CsaProblem(scores, b);
}

PredictiveInterval union_interval(std::span<const PredictiveInterval> intervals) {
  if (intervals.empty()) throw ContractError("union of no intervals");
  PredictiveInterval out = intervals.front();
  for (const auto& c : intervals.subspan(1)) {
    if (c.lower_unbounded || out.lower_unbounded) out.lower_unbounded = true;
    else out.lower = std::min(out.lower, c.lower);
    if (c.upper_unbounded || out.upper_unbounded) out.upper_unbounded = true;
    else out.upper = std::max(out.upper, c.upper);
    out.threshold = std::max(out.threshold, c.threshold);
  }
  return out;
}

ScoreCenter ArmFit::center(std::span<const double> x) const {
  if (kind == ScoreKind::mean) return ScoreCenter::mean(mean->predict(x));
  auto [lo, hi] = quantile->predict(x);
  return ScoreCenter::cqr(lo, hi);
}

CsaProblem ArmFit::same_arm_problem(double gamma) const {
  return make_same_arm_problem(cal_scores, cal_e, gamma, arm, p_t);
}

CsaProblem ArmFit::cross_arm_problem(double gamma, int target_group) const {
  std::vector<WeightPair> b(cal_e.size());
  for (std::size_t i = 0; i < b.size(); ++i)
    b[i] = weight_bounds_cross_arm(cal_e[i], gamma, target_group);
  return CsaProblem(cal_scores, b);
}

ArmFit fit_arm(const ObservationalDataset& ds, const IndexSet& prelim, const IndexSet& cal,
               int arm, ScoreKind kind, double alpha, const ModelConfig& cfg,
               const PropensityModel& propensity) {
  ArmFit f;
  f.arm = arm;
  f.kind = kind;
  f.propensity = propensity;
  const IndexSet pre_arm = arm_indices(ds, prelim, arm);
  const Matrix Xp = ds.covariates(pre_arm);
  const auto yp = ds.outcomes(pre_arm);
  if (kind == ScoreKind::mean) f.mean = fit_mean(Xp, yp, cfg);
  else f.quantile = fit_quantile(Xp, yp, {alpha / 2.0, 1.0 - alpha / 2.0}, cfg);

  f.fold_t = ds.treatments(cal);
  f.fold_e = propensity.predict(ds.covariates(cal));
  f.p_t = marginal_treatment_prob(f.fold_t, arm);
  for (std::size_t i = 0; i < cal.size(); ++i) {
    if (f.fold_t[i] != arm) continue;
    const Unit& u = ds[cal[i]];
    f.cal_scores.push_back(f.center(u.covariates).score(u.outcome));
    f.cal_e.push_back(f.fold_e[i]);
  }
  if (f.cal_scores.empty()) throw ContractError("calibration fold has no units in the arm");
  return f;
}

}  // namespace confsa
