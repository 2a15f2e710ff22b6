#include "confsa/ite.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "confsa/csa.hpp"
#include "confsa/error.hpp"

namespace confsa {

std::string to_string(IteMethod m) { return m == IteMethod::bonferroni ? "bonferroni" : "nested"; }

bool IteInterval::contains(double tau) const {
  return (lower_unbounded || lower <= tau) && (upper_unbounded || tau <= upper);
}

double IteInterval::width() const {
  if (!bounded()) return std::numeric_limits<double>::infinity();
  return std::max(0.0, upper - lower);
}

IteInterval bonferroni_ite(const PredictiveInterval& c1, const PredictiveInterval& c0,
                           double alpha1, double alpha0) {
  IteInterval out;
  out.method = IteMethod::bonferroni;
  out.alpha1 = alpha1;
  out.alpha0 = alpha0;
  out.lower_unbounded = c1.lower_unbounded || c0.upper_unbounded;
  out.upper_unbounded = c1.upper_unbounded || c0.lower_unbounded;
  if (!out.lower_unbounded) out.lower = c1.lower - c0.upper;
  if (!out.upper_unbounded) out.upper = c1.upper - c0.lower;
  return out;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_both_arms(const ObservationalDataset& ds, const IndexSet& idx, const char* what) {
  bool has0 = false, has1 = false;
  for (auto i : idx) (ds[i].treatment ? has1 : has0) = true;
  if (!has0 || !has1) throw ContractError(std::string(what) + " must contain both arms");
}

}  // namespace

EndpointRegressor::EndpointRegressor(const Matrix& X, std::span<const double> endpoints, double tau,
                                     const ModelConfig& cfg)
    : kind_(cfg.mean_kind), tau_(tau) {
  if (kind_ == ModelKind::knn) {
    knn_ = fit_knn_quantile(X, endpoints, tau, cfg);
    return;
  }
  IndexSet finite;
  std::size_t below = 0;
  for (std::size_t i = 0; i < endpoints.size(); ++i) {
    if (std::isfinite(endpoints[i])) finite.push_back(i);
    else below += endpoints[i] < 0.0;
  }
  const double n = static_cast<double>(endpoints.size());
  const double above = n - static_cast<double>(finite.size() + below);
  // marginal share of infinite endpoints decides the level left for the line
  if (static_cast<double>(below) >= tau * n) {
    constant_ = -std::numeric_limits<double>::infinity();
    return;
  }
  if (above > (1.0 - tau) * n || finite.size() < 2) {
    constant_ = std::numeric_limits<double>::infinity();
    return;
  }
  const double level = (tau * n - static_cast<double>(below)) / static_cast<double>(finite.size());
  Matrix Xf(finite.size(), X.cols);
  std::vector<double> yf;
  for (std::size_t r = 0; r < finite.size(); ++r) {
    std::copy_n(X.row(finite[r]).begin(), X.cols, Xf.data.begin() + static_cast<std::ptrdiff_t>(r * X.cols));
    yf.push_back(endpoints[finite[r]]);
  }
  line_ = fit_linear_quantile(Xf, yf, std::clamp(level, 1e-6, 1.0 - 1e-6), cfg);
}

double EndpointRegressor::predict(std::span<const double> x) const {
  if (knn_) return knn_->predict(x);
  if (line_) return line_->predict(x);
  return constant_;
}

NestedIteModel fit_endpoint_model(const Matrix& X, std::span<const double> lower,
                                  std::span<const double> upper, const NestedConfig& cfg) {
  if (lower.size() != X.rows || upper.size() != X.rows)
    throw ContractError("endpoint counts differ from covariate rows");
  if (X.rows == 0) throw ContractError("no validation units");
  ModelConfig m = cfg.model;
  m.k = cfg.endpoint_k;
  return {EndpointRegressor(X, lower, cfg.lower_level, m), EndpointRegressor(X, upper, cfg.upper_level, m),
          X.rows, 0.0};
}

NestedIteModel nested_ite_train(const ObservationalDataset& ds, const IndexSet& train,
                                const IndexSet& validation, const SensitivitySpec& spec,
                                const NestedConfig& cfg) {
  spec.validate();
  require_both_arms(ds, train, "training split");
  require_both_arms(ds, validation, "validation split");

  const SplitPlan inner = split(train.size(), {cfg.prelim_fraction, 1.0 - cfg.prelim_fraction}, cfg.seed);
  IndexSet prelim, cal;
  for (auto i : inner.preliminary()) prelim.push_back(train[i]);
  for (auto i : inner.calibration()) cal.push_back(train[i]);
  require_both_arms(ds, prelim, "preliminary fold");
  require_both_arms(ds, cal, "calibration fold");

  ModelConfig model = cfg.model;
  model.clip = spec.eta;
  const PropensityModel prop = fit_propensity(ds.covariates(prelim), ds.treatments(prelim), model);
  const ArmFit fit1 = fit_arm(ds, prelim, cal, 1, cfg.score, spec.alpha, model, prop);
  const ArmFit fit0 = fit_arm(ds, prelim, cal, 0, cfg.score, spec.alpha, model, prop);
  const CsaProblem y1_for_controls = fit1.cross_arm_problem(spec.gamma, 0);
  const CsaProblem y0_for_treated = fit0.cross_arm_problem(spec.gamma, 1);

  const Matrix Xv = ds.covariates(validation);
  std::vector<double> lo(validation.size()), hi(validation.size());
  for (std::size_t i = 0; i < validation.size(); ++i) {
    const Unit& u = ds[validation[i]];
    const double e = prop.predict(u.covariates);
    if (u.treatment == 0) {
      const auto c1 = csa_interval(y1_for_controls, fit1.center(u.covariates),
                                   weight_bounds_cross_arm(e, spec.gamma, 0), spec.alpha);
      lo[i] = c1.lower_unbounded ? -kInf : c1.lower - u.outcome;
      hi[i] = c1.upper_unbounded ? kInf : c1.upper - u.outcome;
    } else {
      const auto c0 = csa_interval(y0_for_treated, fit0.center(u.covariates),
                                   weight_bounds_cross_arm(e, spec.gamma, 1), spec.alpha);
      lo[i] = c0.upper_unbounded ? -kInf : u.outcome - c0.upper;
      hi[i] = c0.lower_unbounded ? kInf : u.outcome - c0.lower;
    }
  }
  NestedIteModel m = fit_endpoint_model(Xv, lo, hi, cfg);
  m.alpha = spec.alpha;
  return m;
}

IteInterval nested_ite_predict(const NestedIteModel& model, std::span<const double> x) {
  IteInterval out;
  out.method = IteMethod::nested;
  out.alpha0 = out.alpha1 = model.alpha;
  double lo = model.lower.predict(x);
  double hi = model.upper.predict(x);
  if (lo > hi) {
    std::swap(lo, hi);
    out.swapped = true;
  }
  out.lower_unbounded = std::isinf(lo);
  out.upper_unbounded = std::isinf(hi);
  out.lower = out.lower_unbounded ? 0.0 : lo;
  out.upper = out.upper_unbounded ? 0.0 : hi;
  return out;
}

}  // namespace confsa
