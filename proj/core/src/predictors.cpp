#include "confsa/predictors.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "confsa/error.hpp"

namespace confsa {

namespace detail {

Standardizer Standardizer::fit(const Matrix& X) {
  Standardizer s;
  s.mean.assign(X.cols, 0.0);
  s.scale.assign(X.cols, 1.0);
  const double n = static_cast<double>(X.rows);
  for (std::size_t i = 0; i < X.rows; ++i)
    for (std::size_t j = 0; j < X.cols; ++j) s.mean[j] += X(i, j) / n;
  std::vector<double> var(X.cols, 0.0);
  for (std::size_t i = 0; i < X.rows; ++i)
    for (std::size_t j = 0; j < X.cols; ++j) {
      double d = X(i, j) - s.mean[j];
      var[j] += d * d / n;
    }
  // constant columns keep scale 1 so they standardize to zero
  for (std::size_t j = 0; j < X.cols; ++j)
    if (var[j] > 1e-24) s.scale[j] = std::sqrt(var[j]);
  return s;
}

Matrix Standardizer::apply(const Matrix& X) const {
  Matrix Z(X.rows, X.cols);
  for (std::size_t i = 0; i < X.rows; ++i) apply(X.row(i), Z.row(i));
  return Z;
}

void Standardizer::apply(std::span<const double> x, std::span<double> out) const {
  if (x.size() != mean.size()) throw ContractError("query has the wrong covariate dimension");
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - mean[j]) / scale[j];
}

KnnIndex::KnnIndex(const Matrix& X, std::vector<double> y, std::size_t k)
    : std_(Standardizer::fit(X)), Z_(std_.apply(X)), y_(std::move(y)), k_(k) {
  if (y_.size() != X.rows) throw ContractError("covariate and outcome counts differ");
  if (k_ == 0 || k_ > y_.size()) throw ContractError("k must be in [1, n]");
}

void KnnIndex::neighbor_values(std::span<const double> x, std::vector<double>& out) const {
  std::vector<double> z(Z_.cols);
  std_.apply(x, z);
  const std::size_t n = Z_.rows;
  std::vector<std::pair<double, std::size_t>> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* r = Z_.data.data() + i * Z_.cols;
    double s = 0.0;
    for (std::size_t j = 0; j < Z_.cols; ++j) {
      double diff = r[j] - z[j];
      s += diff * diff;
    }
    d[i] = {s, i};
  }
  if (k_ < n) std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k_ - 1), d.end());
  out.resize(k_);
  // nth_element leaves the k smallest (by distance, then index) in front
  for (std::size_t i = 0; i < k_; ++i) out[i] = y_[d[i].second];
}

}  // namespace detail

namespace {

std::size_t resolve_k(const ModelConfig& cfg, std::size_t n) {
  std::size_t k = cfg.k ? cfg.k : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
  return std::clamp<std::size_t>(k, 1, n);
}

void check_training(const Matrix& X, std::size_t ny, std::size_t min_n) {
  if (X.rows != ny) throw ContractError("covariate and outcome counts differ");
  if (X.rows < min_n)
    throw ContractError("need at least " + std::to_string(min_n) + " training pairs");
  if (X.cols == 0) throw ContractError("need at least one covariate");
}

}  // namespace

MeanPredictor fit_mean(const Matrix& X, std::span<const double> y, const ModelConfig& cfg) {
  check_training(X, y.size(), 2);
  MeanPredictor m;
  m.kind_ = cfg.mean_kind;
  m.n_ = X.rows;
  if (cfg.mean_kind == ModelKind::knn) {
    m.knn_ = std::make_shared<detail::KnnIndex>(X, std::vector<double>(y.begin(), y.end()),
                                                resolve_k(cfg, X.rows));
    return m;
  }
  // ridge on standardized features, intercept unpenalized
  m.std_ = detail::Standardizer::fit(X);
  Matrix Z = m.std_.apply(X);
  const auto n = static_cast<Eigen::Index>(Z.rows);
  const auto p = static_cast<Eigen::Index>(Z.cols);
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> A(
      Z.data.data(), n, p);
  Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
  const double ybar = yv.mean();
  Eigen::MatrixXd G = A.transpose() * A;
  G.diagonal().array() += cfg.ridge * static_cast<double>(n);
  Eigen::VectorXd beta = G.ldlt().solve(A.transpose() * (yv.array() - ybar).matrix());
  m.beta_.assign(beta.data(), beta.data() + p);
  m.intercept_ = ybar;
  return m;
}

LinearQuantileRegressor fit_linear_quantile(const Matrix& X, std::span<const double> y, double tau,
                                            const ModelConfig& cfg) {
  check_training(X, y.size(), 2);
  if (!(tau > 0.0 && tau < 1.0)) throw ContractError("quantile level must be in (0, 1)");
  LinearQuantileRegressor m;
  m.tau_ = tau;
  m.std_ = detail::Standardizer::fit(X);
  const Matrix Z = m.std_.apply(X);
  const auto n = static_cast<Eigen::Index>(Z.rows);
  const auto p = static_cast<Eigen::Index>(Z.cols);
  Eigen::MatrixXd A(n, p + 1);
  A.col(0).setOnes();
  A.rightCols(p) = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      Z.data.data(), n, p);
  Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);

  // start from the tau-quantile as intercept
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p + 1);
  beta(0) = knn_quantile_of(std::vector<double>(y.begin(), y.end()), tau);
  const double scale = std::max(1e-12, (yv.array() - yv.mean()).abs().mean());
  const double eps = 1e-6 * scale;
  const Eigen::VectorXd shift = (2.0 * tau - 1.0) * A.transpose() * Eigen::VectorXd::Ones(n);
  for (int it = 0; it < 200; ++it) {
    const Eigen::VectorXd r = yv - A * beta;
    const Eigen::VectorXd w = (eps + r.array().abs()).inverse();
    Eigen::MatrixXd G = A.transpose() * w.asDiagonal() * A;
    G.diagonal().tail(p).array() += cfg.ridge * static_cast<double>(n);
    const Eigen::VectorXd next = G.ldlt().solve(A.transpose() * w.asDiagonal() * yv + shift);
    const double step = (next - beta).cwiseAbs().maxCoeff();
    beta = next;
    if (step < 1e-9 * scale) break;
  }
  m.intercept_ = beta(0);
  m.beta_.assign(beta.data() + 1, beta.data() + 1 + p);
  return m;
}

double LinearQuantileRegressor::predict(std::span<const double> x) const {
  std::vector<double> z(beta_.size());
  std_.apply(x, z);
  double s = intercept_;
  for (std::size_t j = 0; j < z.size(); ++j) s += beta_[j] * z[j];
  return s;
}

double MeanPredictor::predict(std::span<const double> x) const {
  if (kind_ == ModelKind::knn) {
    std::vector<double> vals;
    knn_->neighbor_values(x, vals);
    return std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(vals.size());
  }
  std::vector<double> z(beta_.size());
  std_.apply(x, z);
  double s = intercept_;
  for (std::size_t j = 0; j < z.size(); ++j) s += beta_[j] * z[j];
  return s;
}

std::vector<double> MeanPredictor::predict(const Matrix& X) const {
  std::vector<double> out(X.rows);
  for (std::size_t i = 0; i < X.rows; ++i) out[i] = predict(X.row(i));
  return out;
}

double knn_quantile_of(std::vector<double> values, double tau) {
  if (values.empty()) throw ContractError("quantile of an empty neighbor set");
  const double k = static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil(tau * k - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(rank - 1),
                   values.end());
  return values[rank - 1];
}

KnnQuantileRegressor fit_knn_quantile(const Matrix& X, std::span<const double> y, double tau,
                                      const ModelConfig& cfg) {
  if (!(tau > 0.0 && tau < 1.0)) throw ContractError("quantile level must be in (0, 1)");
  check_training(X, y.size(), 1);
  KnnQuantileRegressor r;
  r.tau_ = tau;
  r.knn_ = std::make_shared<detail::KnnIndex>(X, std::vector<double>(y.begin(), y.end()),
                                              resolve_k(cfg, X.rows));
  return r;
}

double KnnQuantileRegressor::predict(std::span<const double> x) const {
  std::vector<double> vals;
  knn_->neighbor_values(x, vals);
  return knn_quantile_of(std::move(vals), tau_);
}

QuantilePredictor fit_quantile(const Matrix& X, std::span<const double> y,
                               std::pair<double, double> levels, const ModelConfig& cfg) {
  auto [lo, hi] = levels;
  if (!(lo > 0.0 && lo < 1.0 && hi > 0.0 && hi < 1.0))
    throw ContractError("quantile levels must be in (0, 1)");
  if (!(lo < hi)) throw ContractError("lower quantile level must be below the upper level");
  const auto min_n = static_cast<std::size_t>(std::ceil(1.0 / std::min(lo, 1.0 - hi) - 1e-9));
  check_training(X, y.size(), min_n);
  QuantilePredictor q;
  q.levels_ = levels;
  q.knn_ = std::make_shared<detail::KnnIndex>(X, std::vector<double>(y.begin(), y.end()),
                                              resolve_k(cfg, X.rows));
  return q;
}

std::pair<double, double> QuantilePredictor::predict(std::span<const double> x) const {
  std::vector<double> vals;
  knn_->neighbor_values(x, vals);
  double a = knn_quantile_of(vals, levels_.first);
  double b = knn_quantile_of(std::move(vals), levels_.second);
  if (a > b) std::swap(a, b);
  return {a, b};
}

PropensityModel fit_propensity(const Matrix& X, std::span<const int> t, const ModelConfig& cfg) {
  check_training(X, t.size(), 2);
  if (!(cfg.clip > 0.0 && cfg.clip < 0.5)) throw ContractError("clip floor must be in (0, 0.5)");
  bool has0 = false, has1 = false;
  for (int v : t) {
    if (v == 0) has0 = true;
    else if (v == 1) has1 = true;
    else throw ContractError("treatments must be 0 or 1");
  }
  if (!has0 || !has1) throw ContractError("propensity fit needs both treatment values");

  PropensityModel m;
  m.clip_ = cfg.clip;
  m.std_ = detail::Standardizer::fit(X);
  Matrix Z = m.std_.apply(X);
  const auto n = static_cast<Eigen::Index>(Z.rows);
  const auto p = static_cast<Eigen::Index>(Z.cols);
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> A(
      Z.data.data(), n, p);
  Eigen::VectorXd tv(n);
  for (Eigen::Index i = 0; i < n; ++i) tv[i] = t[static_cast<std::size_t>(i)];

  // gradient ascent on the mean log-likelihood minus (l2 / 2) |beta|^2
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  double b0 = 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int it = 0; it < cfg.iterations; ++it) {
    Eigen::VectorXd eta = (A * beta).array() + b0;
    Eigen::VectorXd r = tv - (1.0 / (1.0 + (-eta.array()).exp())).matrix();
    Eigen::VectorXd g = inv_n * (A.transpose() * r) - cfg.l2 * beta;
    beta += cfg.step * g;
    b0 += cfg.step * inv_n * r.sum();
  }
  m.beta_.assign(beta.data(), beta.data() + p);
  m.intercept_ = b0;
  return m;
}

double PropensityModel::predict(std::span<const double> x) const {
  std::vector<double> z(beta_.size());
  std_.apply(x, z);
  double eta = intercept_;
  for (std::size_t j = 0; j < z.size(); ++j) eta += beta_[j] * z[j];
  const double e = 1.0 / (1.0 + std::exp(-eta));
  return std::clamp(e, clip_, 1.0 - clip_);
}

std::vector<double> PropensityModel::predict(const Matrix& X) const {
  std::vector<double> out(X.rows);
  for (std::size_t i = 0; i < X.rows; ++i) out[i] = predict(X.row(i));
  return out;
}

double marginal_treatment_prob(std::span<const int> treatments, int t) {
  if (treatments.empty()) throw ContractError("empty dataset");
  if (t != 0 && t != 1) throw ContractError("arm must be 0 or 1");
  std::size_t c = 0;
  for (int v : treatments) c += (v == t);
  if (c == 0 || c == treatments.size()) throw ContractError("both arms must be present");
  return static_cast<double>(c) / static_cast<double>(treatments.size());
}

double marginal_treatment_prob(const ObservationalDataset& ds, int t) {
  return marginal_treatment_prob(ds.treatments(), t);
}

}  // namespace confsa
