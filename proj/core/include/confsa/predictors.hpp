#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "confsa/dataset.hpp"
#include "confsa/matrix.hpp"

namespace confsa {

enum class ModelKind { knn, linear };

struct ModelConfig {
  ModelKind mean_kind = ModelKind::knn;
  std::size_t k = 0;          // neighbors; 0 means ceil(sqrt(n))
  double ridge = 1e-6;        // linear mean penalty
  double l2 = 1e-4;           // logistic penalty
  double step = 0.1;          // logistic gradient step
  int iterations = 500;       // logistic iterations
  double clip = 0.01;         // propensity floor eta
  std::uint64_t seed = 0;
};

namespace detail {
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;
  static Standardizer fit(const Matrix& X);
  Matrix apply(const Matrix& X) const;
  void apply(std::span<const double> x, std::span<double> out) const;
};

// Brute-force neighbor search on standardized features; ties by index.
class KnnIndex {
 public:
  KnnIndex(const Matrix& X, std::vector<double> y, std::size_t k);
  std::size_t k() const { return k_; }
  std::size_t size() const { return y_.size(); }
  // Outcomes of the k nearest training points.
  void neighbor_values(std::span<const double> x, std::vector<double>& out) const;

 private:
  Standardizer std_;
  Matrix Z_;
  std::vector<double> y_;
  std::size_t k_;
};
}  // namespace detail

class MeanPredictor {
 public:
  double predict(std::span<const double> x) const;
  std::vector<double> predict(const Matrix& X) const;
  std::size_t training_size() const { return n_; }
  ModelKind kind() const { return kind_; }

 private:
  friend MeanPredictor fit_mean(const Matrix&, std::span<const double>, const ModelConfig&);
  ModelKind kind_ = ModelKind::knn;
  std::size_t n_ = 0;
  std::shared_ptr<const detail::KnnIndex> knn_;
  detail::Standardizer std_;
  std::vector<double> beta_;
  double intercept_ = 0.0;
};

MeanPredictor fit_mean(const Matrix& X, std::span<const double> y, const ModelConfig& cfg);

// Empirical tau-quantile of the k nearest outcomes, read as the
// ceil(tau * k)-th smallest neighbor value.
class KnnQuantileRegressor {
 public:
  double predict(std::span<const double> x) const;
  double level() const { return tau_; }

 private:
  friend KnnQuantileRegressor fit_knn_quantile(const Matrix&, std::span<const double>,
                                               double, const ModelConfig&);
  std::shared_ptr<const detail::KnnIndex> knn_;
  double tau_ = 0.5;
};

KnnQuantileRegressor fit_knn_quantile(const Matrix& X, std::span<const double> y, double tau,
                                      const ModelConfig& cfg);

double knn_quantile_of(std::vector<double> values, double tau);

// Linear conditional tau-quantile, fitted by the majorize-minimize
// iteration for the check loss on standardized features.
class LinearQuantileRegressor {
 public:
  double predict(std::span<const double> x) const;
  double level() const { return tau_; }

 private:
  friend LinearQuantileRegressor fit_linear_quantile(const Matrix&, std::span<const double>,
                                                     double, const ModelConfig&);
  detail::Standardizer std_;
  std::vector<double> beta_;
  double intercept_ = 0.0;
  double tau_ = 0.5;
};

LinearQuantileRegressor fit_linear_quantile(const Matrix& X, std::span<const double> y, double tau,
                                            const ModelConfig& cfg);

class QuantilePredictor {
 public:
  // Returns (lower, upper) with lower <= upper.
  std::pair<double, double> predict(std::span<const double> x) const;
  std::pair<double, double> levels() const { return levels_; }

 private:
  friend QuantilePredictor fit_quantile(const Matrix&, std::span<const double>,
                                        std::pair<double, double>, const ModelConfig&);
  std::shared_ptr<const detail::KnnIndex> knn_;
  std::pair<double, double> levels_{0.1, 0.9};
};

QuantilePredictor fit_quantile(const Matrix& X, std::span<const double> y,
                               std::pair<double, double> levels, const ModelConfig& cfg);

class PropensityModel {
 public:
  double predict(std::span<const double> x) const;
  std::vector<double> predict(const Matrix& X) const;
  double clip() const { return clip_; }

 private:
  friend PropensityModel fit_propensity(const Matrix&, std::span<const int>, const ModelConfig&);
  detail::Standardizer std_;
  std::vector<double> beta_;
  double intercept_ = 0.0;
  double clip_ = 0.01;
};

PropensityModel fit_propensity(const Matrix& X, std::span<const int> t, const ModelConfig& cfg);

double marginal_treatment_prob(const ObservationalDataset& ds, int t);
double marginal_treatment_prob(std::span<const int> treatments, int t);

}  // namespace confsa
