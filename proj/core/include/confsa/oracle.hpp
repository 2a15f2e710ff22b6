#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "confsa/dataset.hpp"
#include "confsa/random.hpp"

namespace confsa {

enum class NoiseMode { homoscedastic, heteroscedastic };
enum class ControlMode { zero, two_arm };

// X ~ U(0,1)^p, e(X) = (1 + B_{2,4}(1 - X_1)) / 4, Y(1) = f(X_1) f(X_2) + sigma eps,
// Y(0) = 0 or f(X_1) f(X_2) + 10 sin(X_3) / (1 + exp(-5 X_3)) + sigma eps.
struct SyntheticDGP {
  std::size_t dim = 20;
  NoiseMode noise = NoiseMode::homoscedastic;
  ControlMode control = ControlMode::zero;

  static double f(double x);
  double propensity(std::span<const double> x) const;
  double mean(int t, std::span<const double> x) const;
};

struct UnitTruth {
  double propensity = 0.0;
  double mean0 = 0.0;
  double mean1 = 0.0;
  double sigma = 1.0;
  double noise0 = 0.0;  // standardized noise of Y(0)
  double noise1 = 0.0;  // standardized noise of Y(1)
};

class TruthAccess;

// Per-unit ground truth. Contents are only reachable through TruthAccess,
// which the evaluation code uses; estimators take plain datasets.
class SealedTruth {
 public:
  std::size_t size() const { return units_.size(); }

 private:
  friend class TruthAccess;
  friend struct GeneratedData;
  std::vector<UnitTruth> units_;
};

class TruthAccess {
 public:
  static const UnitTruth& unit(const SealedTruth& t, std::size_t i) { return t.units_.at(i); }
  static std::vector<UnitTruth>& units(SealedTruth& t) { return t.units_; }
};

struct GeneratedData {
  ObservationalDataset data;
  SealedTruth truth;
};

// Unit i is drawn from make_rng(seed, {i}), so results do not depend on
// how generation is scheduled.
GeneratedData generate(const SyntheticDGP& dgp, std::size_t n, std::uint64_t seed);

// Keeps drawing units until `n_treated` treated units have been seen.
GeneratedData generate_until_treated(const SyntheticDGP& dgp, std::size_t n_treated,
                                     std::uint64_t seed);

void write_truth_csv(const GeneratedData& g, const std::filesystem::path& path);

// eta(y) = 1/Gamma on [q_lo, q_hi] and Gamma outside, normalizer M.
struct TiltSpec {
  enum class Shape { identity, two_sided };
  Shape shape = Shape::identity;
  double gamma = 1.0;
  double q_lo = 0.0;
  double q_hi = 0.0;
  double normalizer = 1.0;

  double eta(double y) const;
};

TiltSpec identity_tilt();
// Cut points from the empirical quantiles of a proposal sample bank.
TiltSpec tilt_two_sided(double gamma, std::span<const double> proposal_bank);
// Cut points from the Normal(mean, sd) quantile function.
TiltSpec tilt_two_sided_normal(double gamma, double mean, double sd);

// Monte Carlo estimate of M = E_q[eta(Y)].
double estimate_normalizer(const TiltSpec& tilt, const std::function<double(Rng&)>& proposal,
                           std::size_t draws, Rng& rng);

struct RejectionStats {
  std::size_t proposals = 0;
  std::size_t accepted = 0;
};

// Accepts a proposal draw with probability eta(y) / (Gamma M).
double sample_counterfactual(const TiltSpec& tilt, const std::function<double(Rng&)>& proposal,
                             Rng& rng, RejectionStats* stats = nullptr);

// One draw of Y(1) - Y(0): the factual arm uses the stored noise, the other
// arm is drawn from the tilted law at the given Gamma.
double true_ite_sample(const SyntheticDGP& dgp, double gamma, const UnitTruth& unit,
                       int factual_arm, Rng& rng);

// Potential outcome Y(t) for a unit whose observed arm is `factual_arm`.
double potential_outcome(const SyntheticDGP& dgp, double gamma, const UnitTruth& unit, int t,
                         int factual_arm, Rng& rng);

}  // namespace confsa
