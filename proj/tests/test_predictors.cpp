#include <gtest/gtest.h>

#include <random>

#include "confsa/error.hpp"
#include "confsa/predictors.hpp"
#include "confsa/random.hpp"

using namespace confsa;

namespace {

Matrix random_matrix(std::size_t n, std::size_t p, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix X(n, p);
  for (auto& v : X.data) v = u(rng);
  return X;
}

Matrix column(std::vector<double> v) {
  Matrix X(v.size(), 1);
  X.data = std::move(v);
  return X;
}

}  // namespace

TEST(MeanPredictor, ConstantOutcome) {
  Rng rng = make_rng(1);
  const Matrix X = random_matrix(200, 3, rng);
  const std::vector<double> y(200, 3.0);
  for (ModelKind kind : {ModelKind::knn, ModelKind::linear}) {
    ModelConfig cfg;
    cfg.mean_kind = kind;
    const MeanPredictor m = fit_mean(X, y, cfg);
    const Matrix Q = random_matrix(50, 3, rng);
    for (double p : m.predict(Q)) EXPECT_NEAR(p, 3.0, 1e-9);
  }
}

TEST(MeanPredictor, OneNeighborInterpolates) {
  Rng rng = make_rng(2);
  const Matrix X = random_matrix(100, 2, rng);
  std::vector<double> y(100);
  for (std::size_t i = 0; i < 100; ++i) y[i] = double(i);
  ModelConfig cfg;
  cfg.k = 1;
  const MeanPredictor m = fit_mean(X, y, cfg);
  for (std::size_t i : {0u, 17u, 99u}) EXPECT_DOUBLE_EQ(m.predict(X.row(i)), y[i]);
}

TEST(MeanPredictor, TwoNeighborAverage) {
  ModelConfig cfg;
  cfg.k = 2;
  const MeanPredictor m = fit_mean(column({0.0, 1.0}), std::vector<double>{0.0, 2.0}, cfg);
  const std::vector<double> q{0.5};
  EXPECT_DOUBLE_EQ(m.predict(q), 1.0);
}

TEST(MeanPredictor, LinearRecoversPlane) {
  Rng rng = make_rng(3);
  const Matrix X = random_matrix(500, 2, rng);
  std::vector<double> y(500);
  for (std::size_t i = 0; i < 500; ++i) y[i] = 1.0 + 2.0 * X(i, 0) - 3.0 * X(i, 1);
  ModelConfig cfg;
  cfg.mean_kind = ModelKind::linear;
  const MeanPredictor m = fit_mean(X, y, cfg);
  const std::vector<double> q{0.25, 0.5};
  EXPECT_NEAR(m.predict(q), 1.0 + 0.5 - 1.5, 1e-3);
}

TEST(MeanPredictor, Errors) {
  EXPECT_THROW(fit_mean(Matrix(0, 1), std::vector<double>{}, {}), Error);
  EXPECT_THROW(fit_mean(column({1.0, 2.0}), std::vector<double>{1.0}, {}), Error);
}

TEST(QuantilePredictor, ConstantOutcome) {
  Rng rng = make_rng(4);
  const Matrix X = random_matrix(300, 2, rng);
  const std::vector<double> y(300, 3.0);
  const QuantilePredictor q = fit_quantile(X, y, {0.1, 0.9}, {});
  const auto [lo, hi] = q.predict(X.row(5));
  EXPECT_DOUBLE_EQ(lo, 3.0);
  EXPECT_DOUBLE_EQ(hi, 3.0);
}

TEST(QuantilePredictor, NeighborQuantileConvention) {
  std::vector<double> v{9, 3, 1, 0, 8, 2, 7, 4, 6, 5};
  EXPECT_DOUBLE_EQ(knn_quantile_of(v, 0.5), 4.0);
  EXPECT_DOUBLE_EQ(knn_quantile_of(v, 0.1), 0.0);
  EXPECT_DOUBLE_EQ(knn_quantile_of(v, 0.11), 1.0);
  EXPECT_DOUBLE_EQ(knn_quantile_of(v, 1.0), 9.0);
}

TEST(QuantilePredictor, LevelsMustIncrease) {
  const Matrix X = column({0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  const std::vector<double> y{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  EXPECT_THROW(fit_quantile(X, y, {0.4, 0.4}, {}), Error);
  EXPECT_THROW(fit_quantile(X, y, {0.6, 0.4}, {}), Error);
}

TEST(QuantilePredictor, OrderedOutput) {
  Rng rng = make_rng(5);
  const Matrix X = random_matrix(400, 2, rng);
  std::normal_distribution<double> z;
  std::vector<double> y(400);
  for (auto& v : y) v = z(rng);
  const QuantilePredictor q = fit_quantile(X, y, {0.1, 0.9}, {});
  for (std::size_t i = 0; i < 50; ++i) {
    const auto [lo, hi] = q.predict(X.row(i));
    EXPECT_LE(lo, hi);
  }
}

TEST(Propensity, BalancedDataNearHalf) {
  Rng rng = make_rng(6);
  const Matrix X = random_matrix(2000, 3, rng);
  std::bernoulli_distribution coin(0.5);
  std::vector<int> t(2000);
  for (auto& v : t) v = coin(rng);
  const PropensityModel m = fit_propensity(X, t, {});
  for (std::size_t i = 0; i < 200; ++i) EXPECT_NEAR(m.predict(X.row(i)), 0.5, 0.05);
}

TEST(Propensity, ClippedOutputs) {
  Rng rng = make_rng(7);
  Matrix X = random_matrix(1000, 1, rng);
  std::vector<int> t(1000);
  for (std::size_t i = 0; i < 1000; ++i) t[i] = X(i, 0) > 0.5;  // separable
  ModelConfig cfg;
  cfg.clip = 0.05;
  cfg.iterations = 2000;
  const PropensityModel m = fit_propensity(X, t, cfg);
  std::uniform_real_distribution<double> wide(-50.0, 50.0);
  for (int i = 0; i < 10000; ++i) {
    const std::vector<double> x{wide(rng)};
    const double e = m.predict(x);
    ASSERT_GE(e, 0.05);
    ASSERT_LE(e, 0.95);
  }
}

TEST(Propensity, SingleArmRejected) {
  const Matrix X = column({0.1, 0.2, 0.3});
  EXPECT_THROW(fit_propensity(X, std::vector<int>{1, 1, 1}, {}), Error);
}

TEST(MarginalProb, Counts) {
  EXPECT_DOUBLE_EQ(marginal_treatment_prob(std::vector<int>{1, 1, 0, 0}, 1), 0.5);
  EXPECT_DOUBLE_EQ(marginal_treatment_prob(std::vector<int>{1, 0, 0, 0}, 0), 0.75);
  EXPECT_THROW(marginal_treatment_prob(std::vector<int>{1, 1}, 0), Error);
}
