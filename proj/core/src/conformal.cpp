#include "confsa/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "confsa/error.hpp"
#include "confsa/msm.hpp"
#include "confsa/predictors.hpp"

namespace confsa {

double Threshold::value() const {
  if (unbounded_) throw ContractError("threshold is unbounded");
  return value_;
}

std::partial_ordering Threshold::operator<=>(const Threshold& o) const {
  if (unbounded_ && o.unbounded_) return std::partial_ordering::equivalent;
  if (unbounded_) return std::partial_ordering::greater;
  if (o.unbounded_) return std::partial_ordering::less;
  return value_ <=> o.value_;
}

bool Threshold::operator==(const Threshold& o) const {
  if (unbounded_ || o.unbounded_) return unbounded_ == o.unbounded_;
  return value_ == o.value_;
}

bool PredictiveInterval::contains(double y) const {
  return (lower_unbounded || lower <= y) && (upper_unbounded || y <= upper);
}

double PredictiveInterval::width() const {
  if (!bounded()) return std::numeric_limits<double>::infinity();
  return std::max(0.0, upper - lower);
}

double ScoreCenter::score(double y) const {
  return kind == ScoreKind::mean ? score_abs_residual(lo, y) : score_cqr(lo, hi, y);
}

PredictiveInterval assemble_interval(const ScoreCenter& c, Threshold q) {
  PredictiveInterval out;
  out.threshold = q;
  if (q.is_unbounded()) {
    out.lower_unbounded = out.upper_unbounded = true;
    return out;
  }
  out.lower = c.lo - q.value();
  out.upper = c.hi + q.value();
  // a CQR threshold below -(hi - lo) / 2 leaves lower > upper: the empty set
  return out;
}

ScoreSet::ScoreSet(std::vector<double> scores) {
  for (double v : scores)
    if (!std::isfinite(v)) throw ContractError("calibration scores must be finite");
  order_.resize(scores.size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::stable_sort(order_.begin(), order_.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  sorted_.resize(scores.size());
  for (std::size_t i = 0; i < order_.size(); ++i) sorted_[i] = scores[order_[i]];
}

Threshold ScoreSet::at(std::size_t i) const {
  if (i >= sorted_.size()) return Threshold::unbounded();
  return Threshold::finite(sorted_[i]);
}

WeightedDiscreteDist::WeightedDiscreteDist(std::vector<double> atoms, std::vector<double> masses,
                                           double sentinel_mass)
    : sentinel_(sentinel_mass) {
  if (atoms.size() != masses.size()) throw ContractError("atoms and masses differ in length");
  if (!(sentinel_mass >= 0.0)) throw ContractError("masses must be nonnegative");
  double total = sentinel_mass;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (!(masses[i] >= 0.0) || !std::isfinite(masses[i]))
      throw ContractError("masses must be finite and nonnegative");
    if (std::isnan(atoms[i]) || atoms[i] == -std::numeric_limits<double>::infinity())
      throw ContractError("atoms must be finite or +inf");
    total += masses[i];
    if (std::isinf(atoms[i])) {
      sentinel_ += masses[i];
    } else {
      atoms_.push_back(atoms[i]);
      masses_.push_back(masses[i]);
    }
  }
  if (!(total > 0.0)) throw ContractError("total mass must be positive");
  if (std::abs(total - 1.0) > kQuantileTol) {
    for (double& m : masses_) m /= total;
    sentinel_ /= total;
  }
}

Threshold weighted_quantile(const WeightedDiscreteDist& dist, double level) {
  if (!(level >= 0.0 && level <= 1.0)) throw ContractError("quantile level must be in [0, 1]");
  const auto& atoms = dist.atoms();
  const auto& masses = dist.masses();
  std::vector<std::size_t> order(atoms.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return atoms[a] < atoms[b]; });
  double cum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    const double v = atoms[order[i]];
    // accumulate every atom tied at v before comparing
    while (i < order.size() && atoms[order[i]] == v) cum += masses[order[i++]];
    if (cum >= level - kQuantileTol) return Threshold::finite(v);
  }
  return Threshold::unbounded();
}

double score_abs_residual(double mu, double y) { return std::abs(y - mu); }

double score_abs_residual(const MeanPredictor& mu, std::span<const double> x, double y) {
  return score_abs_residual(mu.predict(x), y);
}

double score_cqr(double q_lo, double q_hi, double y) { return std::max(q_lo - y, y - q_hi); }

double score_cqr(const QuantilePredictor& q, std::span<const double> x, double y) {
  auto [lo, hi] = q.predict(x);
  return score_cqr(lo, hi, y);
}

PredictiveInterval wcp_interval_nuc(std::span<const double> cal_scores,
                                    std::span<const double> cal_propensity,
                                    const ScoreCenter& target, double target_propensity,
                                    double alpha, int t, double p_t) {
  if (cal_scores.empty()) throw ContractError("empty calibration set");
  if (cal_scores.size() != cal_propensity.size())
    throw ContractError("scores and propensities differ in length");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw ContractError("alpha must be in [0, 1)");
  std::vector<double> masses(cal_scores.size());
  for (std::size_t i = 0; i < masses.size(); ++i)
    masses[i] = weight_bounds_same_arm(cal_propensity[i], 1.0, t, p_t).lo;
  const double target_mass = weight_bounds_same_arm(target_propensity, 1.0, t, p_t).lo;
  WeightedDiscreteDist dist(std::vector<double>(cal_scores.begin(), cal_scores.end()),
                            std::move(masses), target_mass);
  return assemble_interval(target, weighted_quantile(dist, 1.0 - alpha));
}

}  // namespace confsa
