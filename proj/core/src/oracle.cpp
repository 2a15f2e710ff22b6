#include "confsa/oracle.hpp"

#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <fstream>

#include "confsa/error.hpp"
#include "confsa/stats.hpp"

namespace confsa {

double SyntheticDGP::f(double x) { return 2.0 / (1.0 + std::exp(-5.0 * (x - 0.5))); }

double SyntheticDGP::propensity(std::span<const double> x) const {
  return 0.25 * (1.0 + boost::math::ibeta(2.0, 4.0, 1.0 - x[0]));
}

double SyntheticDGP::mean(int t, std::span<const double> x) const {
  const double base = f(x[0]) * f(x[1]);
  if (t == 1) return base;
  if (control == ControlMode::zero) return 0.0;
  return base + 10.0 * std::sin(x[2]) / (1.0 + std::exp(-5.0 * x[2]));
}

namespace {

std::pair<Unit, UnitTruth> draw_unit(const SyntheticDGP& dgp, std::uint64_t seed, std::size_t i) {
  if (dgp.dim < 3) throw ContractError("the synthetic design needs at least 3 covariates");
  Rng rng = make_rng(seed, {i});
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> z01(0.0, 1.0);
  Unit u;
  u.covariates.resize(dgp.dim);
  for (auto& v : u.covariates) v = u01(rng);
  UnitTruth tr;
  tr.propensity = dgp.propensity(u.covariates);
  tr.mean1 = dgp.mean(1, u.covariates);
  tr.mean0 = dgp.mean(0, u.covariates);
  tr.sigma = dgp.noise == NoiseMode::homoscedastic ? 1.0 : 0.5 + u01(rng);
  u.treatment = u01(rng) < tr.propensity ? 1 : 0;
  tr.noise1 = z01(rng);
  tr.noise0 = dgp.control == ControlMode::zero ? 0.0 : z01(rng);
  u.outcome = u.treatment == 1 ? tr.mean1 + tr.sigma * tr.noise1
                               : (dgp.control == ControlMode::zero ? 0.0 : tr.mean0 + tr.sigma * tr.noise0);
  return {std::move(u), tr};
}

std::vector<std::string> default_names(std::size_t p) {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < p; ++j) names.push_back("x" + std::to_string(j + 1));
  return names;
}

}  // namespace

GeneratedData generate(const SyntheticDGP& dgp, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ContractError("n must be at least 1");
  std::vector<Unit> rows;
  GeneratedData g;
  auto& truth = TruthAccess::units(g.truth);
  for (std::size_t i = 0; i < n; ++i) {
    auto [u, t] = draw_unit(dgp, seed, i);
    rows.push_back(std::move(u));
    truth.push_back(t);
  }
  g.data = ObservationalDataset(std::move(rows), default_names(dgp.dim));
  return g;
}

GeneratedData generate_until_treated(const SyntheticDGP& dgp, std::size_t n_treated,
                                     std::uint64_t seed) {
  if (n_treated == 0) throw ContractError("n_treated must be at least 1");
  std::vector<Unit> rows;
  GeneratedData g;
  auto& truth = TruthAccess::units(g.truth);
  std::size_t treated = 0;
  for (std::size_t i = 0; treated < n_treated; ++i) {
    auto [u, t] = draw_unit(dgp, seed, i);
    treated += static_cast<std::size_t>(u.treatment);
    rows.push_back(std::move(u));
    truth.push_back(t);
  }
  g.data = ObservationalDataset(std::move(rows), default_names(dgp.dim));
  return g;
}

void write_truth_csv(const GeneratedData& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "unit,propensity,mean0,mean1,sigma,noise0,noise1\n";
  for (std::size_t i = 0; i < g.truth.size(); ++i) {
    const auto& t = TruthAccess::unit(g.truth, i);
    out << i << ',' << format_double(t.propensity) << ',' << format_double(t.mean0) << ','
        << format_double(t.mean1) << ',' << format_double(t.sigma) << ','
        << format_double(t.noise0) << ',' << format_double(t.noise1) << '\n';
  }
}

double TiltSpec::eta(double y) const {
  if (shape == Shape::identity) return 1.0;
  return (y >= q_lo && y <= q_hi) ? 1.0 / gamma : gamma;
}

TiltSpec identity_tilt() { return {}; }

namespace {

double tail_mass(double gamma) { return 1.0 / (2.0 * (gamma + 1.0)); }

void check_gamma(double gamma) {
  if (!(gamma >= 1.0) || !std::isfinite(gamma)) throw ContractError("gamma must be >= 1");
}

}  // namespace

TiltSpec tilt_two_sided(double gamma, std::span<const double> proposal_bank) {
  check_gamma(gamma);
  if (gamma == 1.0) return identity_tilt();
  if (proposal_bank.size() < 1000) throw ContractError("need at least 1000 proposal draws");
  std::vector<double> bank(proposal_bank.begin(), proposal_bank.end());
  TiltSpec t;
  t.shape = TiltSpec::Shape::two_sided;
  t.gamma = gamma;
  t.q_lo = stats::empirical_quantile(bank, tail_mass(gamma));
  t.q_hi = stats::empirical_quantile(std::move(bank), 1.0 - tail_mass(gamma));
  return t;
}

TiltSpec tilt_two_sided_normal(double gamma, double mean, double sd) {
  check_gamma(gamma);
  if (gamma == 1.0) return identity_tilt();
  const double z = stats::normal_quantile(1.0 - tail_mass(gamma));
  TiltSpec t;
  t.shape = TiltSpec::Shape::two_sided;
  t.gamma = gamma;
  t.q_lo = mean - sd * z;
  t.q_hi = mean + sd * z;
  return t;
}

double estimate_normalizer(const TiltSpec& tilt, const std::function<double(Rng&)>& proposal,
                           std::size_t draws, Rng& rng) {
  if (draws == 0) throw ContractError("need at least one draw");
  double s = 0.0;
  for (std::size_t i = 0; i < draws; ++i) s += tilt.eta(proposal(rng));
  return s / static_cast<double>(draws);
}

double sample_counterfactual(const TiltSpec& tilt, const std::function<double(Rng&)>& proposal,
                             Rng& rng, RejectionStats* stats) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double bound = tilt.gamma * tilt.normalizer;
  for (std::size_t k = 1; k <= 1'000'000; ++k) {
    const double y = proposal(rng);
    if (stats) ++stats->proposals;
    if (tilt.shape == TiltSpec::Shape::identity || u01(rng) < tilt.eta(y) / bound) {
      if (stats) ++stats->accepted;
      return y;
    }
  }
  throw Error("rejection sampler accepted nothing in 1e6 proposals");
}

double potential_outcome(const SyntheticDGP& dgp, double gamma, const UnitTruth& unit, int t,
                         int factual_arm, Rng& rng) {
  const double m = t == 1 ? unit.mean1 : unit.mean0;
  if (t == 0 && dgp.control == ControlMode::zero) return 0.0;
  if (t == factual_arm) return m + unit.sigma * (t == 1 ? unit.noise1 : unit.noise0);
  const TiltSpec tilt = tilt_two_sided_normal(gamma, m, unit.sigma);
  std::normal_distribution<double> z01(0.0, 1.0);
  auto proposal = [&](Rng& r) { return m + unit.sigma * z01(r); };
  return sample_counterfactual(tilt, proposal, rng);
}

double true_ite_sample(const SyntheticDGP& dgp, double gamma, const UnitTruth& unit,
                       int factual_arm, Rng& rng) {
  const double y1 = potential_outcome(dgp, gamma, unit, 1, factual_arm, rng);
  const double y0 = potential_outcome(dgp, gamma, unit, 0, factual_arm, rng);
  return y1 - y0;
}

}  // namespace confsa
