#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "confsa/dataset.hpp"
#include "confsa/matrix.hpp"
#include "confsa/predictors.hpp"

namespace confsa {

struct SensitivitySpec {
  double gamma = 1.0;
  double alpha = 0.2;
  int arm = 1;
  double eta = 0.01;

  double lambda() const { return std::log(gamma); }
  void validate() const;
};

struct WeightPair {
  double lo = 1.0;
  double hi = 1.0;
};

// Per-unit bounds aligned with some ordering of the calibration units,
// plus the bounds for the target point.
struct WeightBounds {
  std::vector<WeightPair> units;
  WeightPair target;
};

WeightPair weight_bounds_same_arm(double e_hat, double gamma, int t, double p_t);

// Bounds for reweighting arm (1 - t) calibration outcomes toward the
// units of group t, e.g. predicting Y(1) for controls uses t = 0.
WeightPair weight_bounds_cross_arm(double e_hat, double gamma, int t);

struct GammaSummary {
  std::string label;
  double median = 1.0;
  double p90 = 1.0;
  double p99 = 1.0;
};

struct GammaCalibration {
  Matrix gamma;  // n x p, entries >= 1
  std::vector<GammaSummary> summary;
};

// Folded odds ratio between the full propensity and the propensity refit
// without covariate j, for every unit i and covariate j.
GammaCalibration calibrate_gamma(const ObservationalDataset& ds, const ModelConfig& cfg);

double odds_ratio(double a, double b);

// Smallest miscoverage at which the worst-case interval is bounded:
// w_hi(target) / (sum w_lo(calibration) + w_hi(target)).
double min_miscoverage(std::span<const double> cal_e, double target_e, double gamma, int t,
                       double p_t);

}  // namespace confsa
