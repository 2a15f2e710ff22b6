#include "confsa/msm.hpp"

#include <algorithm>
#include <cmath>

#include "confsa/error.hpp"
#include "confsa/stats.hpp"

namespace confsa {

void SensitivitySpec::validate() const {
  if (!(gamma >= 1.0) || !std::isfinite(gamma)) throw ContractError("gamma must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ContractError("alpha must be in (0, 1)");
  if (arm != 0 && arm != 1) throw ContractError("arm must be 0 or 1");
  if (!(eta > 0.0 && eta < 0.5)) throw ContractError("eta must be in (0, 0.5)");
}

namespace {

void check_inputs(double e, double gamma, int t) {
  if (!(e > 0.0 && e < 1.0)) throw ContractError("propensity must lie strictly inside (0, 1)");
  if (!(gamma >= 1.0) || !std::isfinite(gamma)) throw ContractError("gamma must be >= 1");
  if (t != 0 && t != 1) throw ContractError("arm must be 0 or 1");
}

// ((1 - e) / e)^(2t - 1)
double inverse_odds_power(double e, int t) { return t == 1 ? (1.0 - e) / e : e / (1.0 - e); }

}  // namespace

WeightPair weight_bounds_same_arm(double e_hat, double gamma, int t, double p_t) {
  check_inputs(e_hat, gamma, t);
  if (!(p_t > 0.0 && p_t < 1.0)) throw ContractError("p_t must be in (0, 1)");
  const double r = inverse_odds_power(e_hat, t);
  if (gamma == 1.0) {
    const double w = (1.0 + r) * p_t;
    return {w, w};
  }
  return {(1.0 + r / gamma) * p_t, (1.0 + gamma * r) * p_t};
}

WeightPair weight_bounds_cross_arm(double e_hat, double gamma, int t) {
  check_inputs(e_hat, gamma, t);
  const double odds = 1.0 / inverse_odds_power(e_hat, t);  // (e / (1 - e))^(2t - 1)
  if (gamma == 1.0) return {odds, odds};
  return {odds / gamma, gamma * odds};
}

double odds_ratio(double a, double b) { return (a / (1.0 - a)) / (b / (1.0 - b)); }

GammaCalibration calibrate_gamma(const ObservationalDataset& ds, const ModelConfig& cfg) {
  const std::size_t p = ds.covariate_dim();
  if (p < 2) throw ContractError("gamma calibration needs at least two covariates");
  const Matrix X = ds.covariates();
  const auto t = ds.treatments();
  const auto full = fit_propensity(X, t, cfg).predict(X);

  GammaCalibration out;
  out.gamma = Matrix(X.rows, p, 1.0);
  for (std::size_t j = 0; j < p; ++j) {
    Matrix Xd(X.rows, p - 1);
    for (std::size_t i = 0; i < X.rows; ++i)
      for (std::size_t c = 0, k = 0; c < p; ++c)
        if (c != j) Xd(i, k++) = X(i, c);
    const auto reduced = fit_propensity(Xd, t, cfg).predict(Xd);
    std::vector<double> col(X.rows);
    for (std::size_t i = 0; i < X.rows; ++i) {
      const double g = odds_ratio(full[i], reduced[i]);
      col[i] = out.gamma(i, j) = g >= 1.0 ? g : 1.0 / g;
    }
    GammaSummary s;
    s.label = ds.names().empty() ? "x" + std::to_string(j + 1) : ds.names()[j];
    s.median = stats::empirical_quantile(col, 0.5);
    s.p90 = stats::empirical_quantile(col, 0.9);
    s.p99 = stats::empirical_quantile(col, 0.99);
    out.summary.push_back(s);
  }
  return out;
}

double min_miscoverage(std::span<const double> cal_e, double target_e, double gamma, int t,
                       double p_t) {
  if (cal_e.empty()) throw ContractError("empty calibration set");
  double lo_sum = 0.0;
  for (double e : cal_e) lo_sum += weight_bounds_same_arm(e, gamma, t, p_t).lo;
  const double hi = weight_bounds_same_arm(target_e, gamma, t, p_t).hi;
  return hi / (lo_sum + hi);
}

}  // namespace confsa
