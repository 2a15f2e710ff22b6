#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "confsa/conformal.hpp"
#include "confsa/dataset.hpp"
#include "confsa/msm.hpp"
#include "confsa/predictors.hpp"

namespace confsa {

enum class IteMethod { bonferroni, nested };

std::string to_string(IteMethod m);

struct IteInterval {
  double lower = 0.0;
  double upper = 0.0;
  bool lower_unbounded = false;
  bool upper_unbounded = false;
  IteMethod method = IteMethod::bonferroni;
  double alpha0 = 0.0;
  double alpha1 = 0.0;
  bool swapped = false;  // nested endpoints crossed and were reordered

  bool bounded() const { return !lower_unbounded && !upper_unbounded; }
  bool contains(double tau) const;
  double width() const;
};

// [L1 - U0, U1 - L0]; c1 built at level 1 - alpha1, c0 at 1 - alpha0.
IteInterval bonferroni_ite(const PredictiveInterval& c1, const PredictiveInterval& c0,
                           double alpha1 = 0.0, double alpha0 = 0.0);

struct NestedConfig {
  ModelConfig model;              // outcome and propensity models
  ScoreKind score = ScoreKind::mean;
  double prelim_fraction = 0.75;  // of the training part I
  double lower_level = 0.4;
  double upper_level = 0.6;
  std::size_t endpoint_k = 0;     // 0 means ceil(sqrt(|I_val|))
  // endpoint regressors use model.mean_kind: knn or linear location shift
  std::uint64_t seed = 0;
};

// tau-quantile of an endpoint given x. k-NN: quantile of the neighbors'
// endpoints. linear: linear quantile regression on the finite endpoints at
// a level adjusted for the share of infinite ones.
class EndpointRegressor {
 public:
  EndpointRegressor() = default;
  EndpointRegressor(const Matrix& X, std::span<const double> endpoints, double tau,
                    const ModelConfig& cfg);
  double predict(std::span<const double> x) const;
  double level() const { return tau_; }

 private:
  ModelKind kind_ = ModelKind::knn;
  double tau_ = 0.5;
  std::optional<KnnQuantileRegressor> knn_;
  std::optional<LinearQuantileRegressor> line_;
  double constant_ = 0.0;  // used when no line is fitted
};

struct NestedIteModel {
  EndpointRegressor lower;
  EndpointRegressor upper;
  std::size_t n_validation = 0;
  double alpha = 0.2;
};

// Builds per-unit ITE endpoint sets on I_val from cross-arm worst-case
// intervals fitted on I, then regresses them on covariates.
NestedIteModel nested_ite_train(const ObservationalDataset& ds, const IndexSet& train,
                                const IndexSet& validation, const SensitivitySpec& spec,
                                const NestedConfig& cfg);

// Second stage on its own: regress given endpoint sets on covariates.
NestedIteModel fit_endpoint_model(const Matrix& X, std::span<const double> lower,
                                  std::span<const double> upper, const NestedConfig& cfg);

IteInterval nested_ite_predict(const NestedIteModel& model, std::span<const double> x);

}  // namespace confsa
