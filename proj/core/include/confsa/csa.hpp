#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "confsa/conformal.hpp"
#include "confsa/dataset.hpp"
#include "confsa/msm.hpp"
#include "confsa/predictors.hpp"

namespace confsa {

struct GreedyResult {
  Threshold threshold = Threshold::unbounded();
  std::size_t flip_index = 0;  // sorted position; size() is the sentinel
  std::vector<double> weights;  // n + 1 entries, sentinel last
  std::size_t iterations = 0;
};

// Maximizes the (1 - alpha) weighted quantile over weights in the boxes.
// `sorted_scores` holds V_1 <= ... <= V_n (sentinel implicit); bounds.units
// is aligned with it and bounds.target belongs to the sentinel.
GreedyResult greedy_max_quantile(std::span<const double> sorted_scores,
                                 const WeightBounds& bounds, double alpha);

// Sorted calibration scores with per-unit bounds, prepared once so that
// per-target worst-case thresholds cost O(log n).
class CsaProblem {
 public:
  CsaProblem() = default;
  // scores and bounds are per calibration unit, in the same (any) order.
  CsaProblem(std::span<const double> scores, std::span<const WeightPair> bounds);

  std::size_t size() const { return scores_.size(); }
  const ScoreSet& scores() const { return scores_; }
  const std::vector<WeightPair>& sorted_bounds() const { return bounds_; }

  // Greedy stop position for the target's bounds.
  std::size_t stop_index(WeightPair target, double alpha) const;
  Threshold threshold(WeightPair target, double alpha) const;

 private:
  ScoreSet scores_;
  std::vector<WeightPair> bounds_;
  std::vector<double> prefix_lo_;   // sum of lo over positions < i
  std::vector<double> suffix_hi_;   // sum of hi over positions >= i
};

PredictiveInterval csa_interval(const CsaProblem& problem, const ScoreCenter& target,
                                WeightPair target_bounds, double alpha);

// Same-arm MSM problem from calibration scores and propensities.
CsaProblem make_same_arm_problem(std::span<const double> scores, std::span<const double> cal_e,
                                 double gamma, int t, double p_t);

// Envelope [min lower, max upper] of a family of intervals.
PredictiveInterval union_interval(std::span<const PredictiveInterval> intervals);

// Predictors for one arm fitted on the preliminary fold, plus that arm's
// calibration scores and propensities.
struct ArmFit {
  int arm = 1;
  ScoreKind kind = ScoreKind::mean;
  std::optional<MeanPredictor> mean;
  std::optional<QuantilePredictor> quantile;
  PropensityModel propensity;
  double p_t = 0.5;                   // arm fraction on the calibration fold
  std::vector<double> cal_scores;     // arm-t calibration units
  std::vector<double> cal_e;          // their estimated propensities
  std::vector<double> fold_e;         // whole calibration fold
  std::vector<int> fold_t;

  ScoreCenter center(std::span<const double> x) const;
  CsaProblem same_arm_problem(double gamma) const;
  // Reweights this arm's scores toward the units of group `target_group`.
  CsaProblem cross_arm_problem(double gamma, int target_group) const;
};

// Fits the outcome model on the arm-t units of `prelim` (CQR levels
// alpha/2, 1 - alpha/2) and scores the arm-t units of `cal`.
ArmFit fit_arm(const ObservationalDataset& ds, const IndexSet& prelim, const IndexSet& cal,
               int arm, ScoreKind kind, double alpha, const ModelConfig& cfg,
               const PropensityModel& propensity);

}  // namespace confsa
