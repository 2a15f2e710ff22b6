#pragma once

#include <compare>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace confsa {

class MeanPredictor;
class QuantilePredictor;

// A score threshold that may be the +infinity sentinel.
class Threshold {
 public:
  static Threshold finite(double v) { return Threshold(v, false); }
  static Threshold unbounded() { return Threshold(0.0, true); }

  bool is_unbounded() const { return unbounded_; }
  bool is_finite() const { return !unbounded_; }
  // Throws if unbounded.
  double value() const;
  // value() or +inf, for reporting only.
  double as_double() const {
    return unbounded_ ? std::numeric_limits<double>::infinity() : value_;
  }

  std::partial_ordering operator<=>(const Threshold& o) const;
  bool operator==(const Threshold& o) const;

 private:
  Threshold(double v, bool u) : value_(v), unbounded_(u) {}
  double value_;
  bool unbounded_;
};

struct PredictiveInterval {
  double lower = 0.0;
  double upper = 0.0;
  bool lower_unbounded = false;
  bool upper_unbounded = false;
  Threshold threshold = Threshold::unbounded();
  std::size_t flip_index = 0;

  bool bounded() const { return !lower_unbounded && !upper_unbounded; }
  bool contains(double y) const;
  double width() const;  // +inf when unbounded
};

enum class ScoreKind { mean, cqr };

// Target-side quantities needed to turn a threshold into an interval:
// mu(x) for the residual score, (q_lo(x), q_hi(x)) for the CQR score.
struct ScoreCenter {
  ScoreKind kind = ScoreKind::mean;
  double lo = 0.0;
  double hi = 0.0;

  static ScoreCenter mean(double mu) { return {ScoreKind::mean, mu, mu}; }
  static ScoreCenter cqr(double qlo, double qhi) { return {ScoreKind::cqr, qlo, qhi}; }
  double score(double y) const;
};

PredictiveInterval assemble_interval(const ScoreCenter& c, Threshold q);

// Calibration scores sorted ascending (stable), with an implicit +inf
// sentinel at position size().
class ScoreSet {
 public:
  ScoreSet() = default;
  explicit ScoreSet(std::vector<double> scores);

  std::size_t size() const { return sorted_.size(); }
  // Position i in [0, size()]; size() is the sentinel.
  Threshold at(std::size_t i) const;
  double score(std::size_t i) const { return sorted_[i]; }
  const std::vector<double>& sorted() const { return sorted_; }
  const std::vector<std::size_t>& order() const { return order_; }
  std::size_t unit_index(std::size_t i) const { return order_[i]; }

  // Reorders per-unit values into sorted-score order.
  template <class T>
  std::vector<T> permute(std::span<const T> per_unit) const {
    std::vector<T> out(order_.size());
    for (std::size_t i = 0; i < order_.size(); ++i) out[i] = per_unit[order_[i]];
    return out;
  }

 private:
  std::vector<double> sorted_;
  std::vector<std::size_t> order_;
};

// Discrete law sum_i p_i delta_{v_i}, with optional mass at +inf.
class WeightedDiscreteDist {
 public:
  // Masses are nonnegative weights, renormalized to sum to one. Atoms equal
  // to +inf are moved onto the sentinel.
  WeightedDiscreteDist(std::vector<double> atoms, std::vector<double> masses,
                       double sentinel_mass = 0.0);

  const std::vector<double>& atoms() const { return atoms_; }
  const std::vector<double>& masses() const { return masses_; }
  double sentinel_mass() const { return sentinel_; }

 private:
  std::vector<double> atoms_;
  std::vector<double> masses_;
  double sentinel_;
};

inline constexpr double kQuantileTol = 1e-12;

// inf{v : F(v) >= level}, ties merged, compared with kQuantileTol slack.
Threshold weighted_quantile(const WeightedDiscreteDist& dist, double level);

double score_abs_residual(double mu, double y);
double score_abs_residual(const MeanPredictor& mu, std::span<const double> x, double y);
double score_cqr(double q_lo, double q_hi, double y);
double score_cqr(const QuantilePredictor& q, std::span<const double> x, double y);

// Weighted split-conformal interval under unconfoundedness with weights
// p_t / P(T = t | x) estimated from the propensity.
PredictiveInterval wcp_interval_nuc(std::span<const double> cal_scores,
                                    std::span<const double> cal_propensity,
                                    const ScoreCenter& target, double target_propensity,
                                    double alpha, int t, double p_t);

}  // namespace confsa
