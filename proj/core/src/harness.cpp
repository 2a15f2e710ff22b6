#include "confsa/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "confsa/csa.hpp"
#include "confsa/cssa.hpp"
#include "confsa/error.hpp"
#include "confsa/stats.hpp"

namespace confsa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const std::map<Method, std::string>& method_names() {
  static const std::map<Method, std::string> names{
      {Method::csa_m, "csa-m"},       {Method::csa_q, "csa-q"},
      {Method::cssa_m, "cssa-m"},     {Method::ite_nuc, "ite-nuc"},
      {Method::bonferroni, "bonferroni"}, {Method::nested, "nested"}};
  return names;
}

// methods whose estimand is Y(1) - Y(0) rather than Y(1)
bool ite_estimand(Method m) { return m == Method::bonferroni || m == Method::nested; }

}  // namespace

std::string to_string(Method m) { return method_names().at(m); }

Method parse_method(const std::string& name) {
  for (const auto& [m, n] : method_names())
    if (n == name) return m;
  throw InputError("unknown method '" + name + "'");
}

void ExperimentConfig::validate() const {
  if (gammas.empty()) throw InputError("gamma grid is empty");
  for (double g : gammas)
    if (!(g >= 1.0) || !std::isfinite(g)) throw InputError("gamma grid entries must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must be in (0, 1)");
  if (n_trials < 1) throw InputError("n_trials must be at least 1");
  if (n_train < 10 || n_target < 1) throw InputError("n_train must be >= 10 and n_target >= 1");
  if (!(prelim_fraction > 0.0 && prelim_fraction < 1.0))
    throw InputError("prelim_fraction must be in (0, 1)");
  if (methods.empty()) throw InputError("no methods selected");
}

void ExperimentConfig::apply_full_scale() {
  n_train = 3000;
  n_target = 10000;
  n_trials = 100;
}

const SweepRow& SweepResult::row(Method m, double gamma) const {
  for (const auto& r : rows)
    if (r.method == m && r.gamma == gamma) return r;
  throw ContractError("no sweep row for " + to_string(m));
}

namespace {

struct TargetSet {
  GeneratedData gen;
  Matrix X;
};

void finish_record(TrialRecord& rec) {
  std::size_t covered = 0, bounded = 0;
  double width = 0.0;
  for (std::size_t j = 0; j < rec.truth.size(); ++j) {
    const double l = rec.lower[j], u = rec.upper[j];
    if (l <= rec.truth[j] && rec.truth[j] <= u) ++covered;
    if (std::isfinite(l) && std::isfinite(u)) {
      ++bounded;
      width += std::max(0.0, u - l);
    } else {
      ++rec.unbounded;
    }
  }
  rec.coverage = static_cast<double>(covered) / static_cast<double>(rec.truth.size());
  rec.mean_width = bounded ? width / static_cast<double>(bounded) : kInf;
}

void put_interval(TrialRecord& rec, std::size_t j, const PredictiveInterval& c) {
  rec.lower[j] = c.lower_unbounded ? -kInf : c.lower;
  rec.upper[j] = c.upper_unbounded ? kInf : c.upper;
}

void put_interval(TrialRecord& rec, std::size_t j, const IteInterval& c) {
  rec.lower[j] = c.lower_unbounded ? -kInf : c.lower;
  rec.upper[j] = c.upper_unbounded ? kInf : c.upper;
}

// Runs one trial for every (method, gamma) pair.
void run_trial(const ExperimentConfig& cfg, std::size_t trial, std::vector<TrialRecord>& out) {
  const std::uint64_t seed = cfg.seed + trial;
  const SyntheticDGP& dgp = cfg.dgp;
  const GeneratedData obs = generate_until_treated(dgp, cfg.n_train, seed);
  const ObservationalDataset& ds = obs.data;

  Rng seeder = make_rng(seed, {1});
  const GeneratedData tgt = generate(dgp, cfg.n_target, seeder());
  const Matrix Xt = tgt.data.covariates();
  const std::size_t nt = cfg.n_target;

  auto uses = [&](Method m) {
    return std::find(cfg.methods.begin(), cfg.methods.end(), m) != cfg.methods.end();
  };
  const bool two_arm = dgp.control == ControlMode::two_arm;
  const bool nuc_nested = uses(Method::ite_nuc) && two_arm;
  const bool need_mean = uses(Method::csa_m) || uses(Method::cssa_m) ||
                         (uses(Method::ite_nuc) && !two_arm) || uses(Method::bonferroni);

  ModelConfig model = cfg.model;
  model.seed = seed;
  const SplitPlan plan = split(ds, {cfg.prelim_fraction, 1.0 - cfg.prelim_fraction}, seed);
  const PropensityModel prop =
      fit_propensity(ds.covariates(plan.preliminary()), ds.treatments(plan.preliminary()), model);
  const std::vector<double> e_t = prop.predict(Xt);

  std::optional<ArmFit> fit_m, fit_q, fit_b1, fit_b0;
  std::vector<ScoreCenter> c_m, c_q, c_b1, c_b0;
  auto centers = [&](const ArmFit& f) {
    std::vector<ScoreCenter> c(nt);
    for (std::size_t j = 0; j < nt; ++j) c[j] = f.center(Xt.row(j));
    return c;
  };
  if (need_mean) {
    fit_m = fit_arm(ds, plan.preliminary(), plan.calibration(), 1, ScoreKind::mean, cfg.alpha,
                    model, prop);
    c_m = centers(*fit_m);
  }
  if (uses(Method::csa_q)) {
    fit_q = fit_arm(ds, plan.preliminary(), plan.calibration(), 1, ScoreKind::cqr, cfg.alpha,
                    model, prop);
    c_q = centers(*fit_q);
  }
  if (uses(Method::bonferroni)) {
    const double half = cfg.alpha / 2.0;
    fit_b1 = fit_arm(ds, plan.preliminary(), plan.calibration(), 1, ScoreKind::mean, half, model, prop);
    fit_b0 = fit_arm(ds, plan.preliminary(), plan.calibration(), 0, ScoreKind::mean, half, model, prop);
    c_b1 = c_m;
    c_b0 = centers(*fit_b0);
  }
  std::optional<SplitPlan> nested_plan;
  if (uses(Method::nested) || nuc_nested) nested_plan = split(ds, {0.5, 0.5}, seed + 0x9e37);

  auto nested_intervals = [&](double gamma, TrialRecord& rec) {
    SensitivitySpec spec;
    spec.gamma = gamma;
    spec.alpha = cfg.alpha;
    spec.eta = model.clip;
    NestedConfig nc;
    nc.model = model;
    nc.prelim_fraction = cfg.prelim_fraction;
    nc.seed = seed;
    const NestedIteModel nm =
        nested_ite_train(ds, nested_plan->sets[0], nested_plan->sets[1], spec, nc);
    for (std::size_t j = 0; j < nt; ++j) put_interval(rec, j, nested_ite_predict(nm, Xt.row(j)));
  };

  std::optional<CsaProblem> nuc_problem;
  if (uses(Method::ite_nuc) && !two_arm) nuc_problem = fit_m->same_arm_problem(1.0);

  for (std::size_t gi = 0; gi < cfg.gammas.size(); ++gi) {
    const double gamma = cfg.gammas[gi];
    // potential outcomes of the targets under the adversarial tilt at gamma
    std::vector<double> y1(nt), ite(nt);
    for (std::size_t j = 0; j < nt; ++j) {
      const UnitTruth& u = TruthAccess::unit(tgt.truth, j);
      const int arm = tgt.data[j].treatment;
      Rng r1 = make_rng(seed, {2, gi, j});
      Rng r0 = make_rng(seed, {3, gi, j});
      y1[j] = potential_outcome(dgp, gamma, u, 1, arm, r1);
      ite[j] = y1[j] - potential_outcome(dgp, gamma, u, 0, arm, r0);
    }

    auto new_record = [&](Method m, const std::vector<double>& truth) -> TrialRecord& {
      TrialRecord rec;
      rec.method = m;
      rec.gamma = gamma;
      rec.trial = trial;
      rec.seed = seed;
      rec.lower.assign(nt, 0.0);
      rec.upper.assign(nt, 0.0);
      rec.truth = truth;
      out.push_back(std::move(rec));
      return out.back();
    };

    std::optional<CsaProblem> prob_m;
    if (uses(Method::csa_m) || uses(Method::cssa_m)) prob_m = fit_m->same_arm_problem(gamma);

    for (Method m : cfg.methods) {
      TrialRecord& rec = new_record(m, ite_estimand(m) || (m == Method::ite_nuc && two_arm) ? ite : y1);
      switch (m) {
        case Method::csa_m:
          for (std::size_t j = 0; j < nt; ++j)
            put_interval(rec, j, csa_interval(*prob_m, c_m[j],
                                              weight_bounds_same_arm(e_t[j], gamma, 1, fit_m->p_t),
                                              cfg.alpha));
          break;
        case Method::csa_q: {
          const CsaProblem prob = fit_q->same_arm_problem(gamma);
          for (std::size_t j = 0; j < nt; ++j)
            put_interval(rec, j, csa_interval(prob, c_q[j],
                                              weight_bounds_same_arm(e_t[j], gamma, 1, fit_q->p_t),
                                              cfg.alpha));
          break;
        }
        case Method::cssa_m: {
          const BalanceConstraint bc = propensity_balance(fit_m->fold_e, fit_m->fold_t, 1);
          CssaOptions opt;
          opt.slack = cfg.cssa_slack;
          const CssaTable table(*prob_m, sort_constraint(*prob_m, bc), cfg.alpha, opt);
          for (std::size_t j = 0; j < nt; ++j) {
            const CssaResult r = table.threshold(weight_bounds_same_arm(e_t[j], gamma, 1, fit_m->p_t));
            put_interval(rec, j, assemble_interval(c_m[j], r.threshold));
          }
          break;
        }
        case Method::ite_nuc:
          if (two_arm) {
            nested_intervals(1.0, rec);
          } else {
            for (std::size_t j = 0; j < nt; ++j)
              put_interval(rec, j, csa_interval(*nuc_problem, c_m[j],
                                                weight_bounds_same_arm(e_t[j], 1.0, 1, fit_m->p_t),
                                                cfg.alpha));
          }
          break;
        case Method::bonferroni: {
          const double half = cfg.alpha / 2.0;
          const CsaProblem p1 = fit_b1->same_arm_problem(gamma);
          const CsaProblem p0 = fit_b0->same_arm_problem(gamma);
          for (std::size_t j = 0; j < nt; ++j) {
            const auto c1 = csa_interval(p1, c_b1[j], weight_bounds_same_arm(e_t[j], gamma, 1, fit_b1->p_t), half);
            const auto c0 = csa_interval(p0, c_b0[j], weight_bounds_same_arm(e_t[j], gamma, 0, fit_b0->p_t), half);
            put_interval(rec, j, bonferroni_ite(c1, c0, half, half));
          }
          break;
        }
        case Method::nested:
          nested_intervals(gamma, rec);
          break;
      }
      finish_record(rec);
    }
  }
}

}  // namespace

SweepResult run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  SweepResult res;
  for (std::size_t i = 0; i < cfg.n_trials; ++i) run_trial(cfg, i, res.records);

  for (Method m : cfg.methods) {
    for (double g : cfg.gammas) {
      SweepRow row;
      row.method = m;
      row.gamma = g;
      std::vector<double> cov, wid;
      for (const auto& r : res.records) {
        if (r.method != m || r.gamma != g) continue;
        cov.push_back(r.coverage);
        if (std::isfinite(r.mean_width)) wid.push_back(r.mean_width);
        row.unbounded += r.unbounded;
        ++row.trials;
      }
      row.coverage_mean = stats::mean(cov);
      row.coverage_sd = stats::sd(cov);
      row.width_mean = wid.empty() ? kInf : stats::mean(wid);
      row.width_sd = stats::sd(wid);
      res.rows.push_back(row);
    }
  }
  return res;
}

ShrinkageTable shrinkage_sharpness(std::span<const TrialRecord> records,
                                   std::span<const double> factors, double alpha) {
  ShrinkageTable t;
  if (factors.empty()) {
    for (int i = 0; i <= 30; ++i) t.factors.push_back(i / 100.0);
  } else {
    t.factors.assign(factors.begin(), factors.end());
  }
  std::vector<std::size_t> covered(t.factors.size(), 0);
  std::size_t total = 0;
  for (const auto& r : records) {
    for (std::size_t j = 0; j < r.truth.size(); ++j) {
      const double l = r.lower[j], u = r.upper[j];
      if (!std::isfinite(l) || !std::isfinite(u)) {
        ++t.excluded;
        continue;
      }
      ++total;
      const double c = 0.5 * (l + u), h = 0.5 * (u - l);
      for (std::size_t k = 0; k < t.factors.size(); ++k) {
        const double hk = (1.0 - t.factors[k]) * h;
        if (std::abs(r.truth[j] - c) <= hk) ++covered[k];
      }
    }
  }
  t.max_factor = -1.0;
  for (std::size_t k = 0; k < t.factors.size(); ++k) {
    const double cov = total ? static_cast<double>(covered[k]) / static_cast<double>(total) : 0.0;
    t.coverage.push_back(cov);
    if (cov >= 1.0 - alpha) t.max_factor = std::max(t.max_factor, t.factors[k]);
  }
  return t;
}

BetaCheck beta_coverage_check(std::span<const BetaTrial> trials, std::size_t n_cal, double alpha) {
  if (trials.size() < 50) throw ContractError("the Beta law check needs at least 50 trials");
  if (n_cal < 1) throw ContractError("n_cal must be positive");
  std::set<std::uint64_t> seeds;
  for (const auto& t : trials)
    if (!seeds.insert(t.calibration_seed).second)
      throw ContractError("trials share a calibration draw");
  const double np1 = static_cast<double>(n_cal + 1);
  const double l = std::floor(np1 * alpha + 1e-9);
  if (l < 1.0) throw ContractError("(n_cal + 1) alpha must be at least 1");
  BetaCheck out;
  out.a = np1 - l;
  out.b = l;
  std::vector<double> cov;
  for (const auto& t : trials) cov.push_back(t.coverage);
  const auto ks = stats::ks_test(cov, [&](double x) { return stats::beta_cdf(x, out.a, out.b); });
  out.ks_statistic = ks.statistic;
  out.p_value = ks.p_value;
  out.pass = ks.p_value >= 0.01;
  return out;
}

std::vector<BetaTrial> run_beta_experiment(const BetaExperimentConfig& cfg) {
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw InputError("alpha must be in (0, 1)");
  const SyntheticDGP& dgp = cfg.dgp;
  // one preliminary fit; only the calibration draw changes between trials
  const GeneratedData pre = generate_until_treated(dgp, cfg.n_prelim, cfg.seed);
  const Matrix Xall = pre.data.covariates();
  const auto tall = pre.data.treatments();
  const PropensityModel prop = fit_propensity(Xall, tall, cfg.model);
  const IndexSet treated = arm_indices(pre.data, 1);
  const MeanPredictor mu =
      fit_mean(pre.data.covariates(treated), pre.data.outcomes(treated), cfg.model);
  const double p_t = marginal_treatment_prob(tall, 1);

  Rng seeder = make_rng(cfg.seed, {1});
  const GeneratedData pop = generate(dgp, cfg.n_population, seeder());
  const Matrix Xp = pop.data.covariates();
  const auto mu_p = mu.predict(Xp);
  const auto e_p = prop.predict(Xp);
  IndexSet targets = arm_indices(pop.data, 0);
  if (!cfg.control_targets) {
    targets.resize(pop.data.size());
    std::iota(targets.begin(), targets.end(), std::size_t{0});
  }
  auto weight = [&](double e) {
    return cfg.control_targets ? weight_bounds_cross_arm(e, 1.0, 0).lo
                               : weight_bounds_same_arm(e, 1.0, 1, p_t).lo;
  };

  std::vector<BetaTrial> out;
  for (std::size_t trial = 0; trial < cfg.n_trials; ++trial) {
    const std::uint64_t cal_seed = seeder();
    const GeneratedData cal = generate_until_treated(dgp, cfg.n_cal, cal_seed);
    const IndexSet arm = arm_indices(cal.data, 1);
    std::vector<double> scores, bounds_e;
    std::vector<WeightPair> bounds;
    for (auto i : arm) {
      const Unit& u = cal.data[i];
      scores.push_back(score_abs_residual(mu, u.covariates, u.outcome));
      const double w = cfg.unit_weights ? 1.0 : weight(prop.predict(u.covariates));
      bounds.push_back({w, w});
    }
    const CsaProblem problem(scores, bounds);
    double cov = 0.0;
    for (std::size_t j : targets) {
      const double w = cfg.unit_weights ? 1.0 : weight(e_p[j]);
      const Threshold q = problem.threshold({w, w}, cfg.alpha);
      if (q.is_unbounded()) {
        cov += 1.0;
        continue;
      }
      const UnitTruth& u = TruthAccess::unit(pop.truth, j);
      const double a = (mu_p[j] - q.value() - u.mean1) / u.sigma;
      const double b = (mu_p[j] + q.value() - u.mean1) / u.sigma;
      cov += stats::normal_cdf(b) - stats::normal_cdf(a);
    }
    out.push_back({cov / static_cast<double>(targets.size()), cal_seed});
  }
  return out;
}

PositivitySummary positivity_summary(std::span<const IteInterval> intervals) {
  PositivitySummary s;
  if (intervals.empty()) return s;
  std::size_t pos = 0, neg = 0;
  for (const auto& c : intervals) {
    if (!c.bounded()) continue;
    if (c.lower > 0.0) ++pos;
    if (c.upper < 0.0) ++neg;
  }
  const double n = static_cast<double>(intervals.size());
  return {static_cast<double>(pos) / n, static_cast<double>(neg) / n};
}

double delta_slack(std::span<const double> e_true, std::span<const double> e_hat, double gamma,
                   int t, double p_t) {
  if (e_true.size() != e_hat.size() || e_true.empty())
    throw ContractError("propensity vectors must be nonempty and aligned");
  auto inv = [t](double e) { return 1.0 / (t == 1 ? e : 1.0 - e); };
  double s = 0.0;
  for (std::size_t i = 0; i < e_true.size(); ++i) s += std::abs(inv(e_hat[i]) - inv(e_true[i]));
  return 0.5 * gamma * p_t * s / static_cast<double>(e_true.size());
}

double delta_slack_diagnostic(const GeneratedData& g, const PropensityModel& propensity,
                              double gamma, int t) {
  if (g.truth.size() == 0 || g.truth.size() != g.data.size())
    throw ContractError("the slack diagnostic needs oracle truth records");
  const IndexSet arm = arm_indices(g.data, t);
  std::vector<double> e, eh;
  for (auto i : arm) {
    e.push_back(TruthAccess::unit(g.truth, i).propensity);
    eh.push_back(propensity.predict(g.data[i].covariates));
  }
  return delta_slack(e, eh, gamma, t, marginal_treatment_prob(g.data, t));
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return format_double(v);
}

}  // namespace

void write_sweep_csv(const SweepResult& r, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "method,gamma,coverage_mean,coverage_sd,width_mean,width_sd,unbounded,trials\n";
  for (const auto& row : r.rows)
    out << to_string(row.method) << ',' << num(row.gamma) << ',' << num(row.coverage_mean) << ','
        << num(row.coverage_sd) << ',' << num(row.width_mean) << ',' << num(row.width_sd) << ','
        << row.unbounded << ',' << row.trials << '\n';
}

void write_records_csv(const SweepResult& r, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "method,gamma,trial,seed,coverage,mean_width,unbounded\n";
  for (const auto& rec : r.records)
    out << to_string(rec.method) << ',' << num(rec.gamma) << ',' << rec.trial << ',' << rec.seed
        << ',' << num(rec.coverage) << ',' << num(rec.mean_width) << ',' << rec.unbounded << '\n';
}

void write_shrinkage_csv(const ShrinkageTable& t, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "factor,coverage\n";
  for (std::size_t k = 0; k < t.factors.size(); ++k)
    out << num(t.factors[k]) << ',' << num(t.coverage[k]) << '\n';
}

namespace {

using nlohmann::json;

json to_json(const ExperimentConfig& c) {
  json j;
  j["dim"] = c.dgp.dim;
  j["noise"] = c.dgp.noise == NoiseMode::homoscedastic ? "homoscedastic" : "heteroscedastic";
  j["control"] = c.dgp.control == ControlMode::zero ? "zero" : "two-arm";
  j["gammas"] = c.gammas;
  j["alpha"] = c.alpha;
  std::vector<std::string> ms;
  for (Method m : c.methods) ms.push_back(to_string(m));
  j["methods"] = ms;
  j["n_train"] = c.n_train;
  j["n_target"] = c.n_target;
  j["n_trials"] = c.n_trials;
  j["seed"] = c.seed;
  j["model"] = {{"mean", c.model.mean_kind == ModelKind::knn ? "knn" : "linear"},
                {"k", c.model.k},
                {"ridge", c.model.ridge},
                {"l2", c.model.l2},
                {"step", c.model.step},
                {"iterations", c.model.iterations},
                {"clip", c.model.clip}};
  j["prelim_fraction"] = c.prelim_fraction;
  j["cssa_slack"] = c.cssa_slack;
  j["shrink_factors"] = c.shrink_factors;
  j["output_dir"] = c.output_dir;
  return j;
}

}  // namespace

ExperimentConfig experiment_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig c;
  try {
    if (j.contains("dim")) c.dgp.dim = j["dim"].get<std::size_t>();
    if (j.contains("noise")) {
      const auto s = j["noise"].get<std::string>();
      if (s == "homoscedastic") c.dgp.noise = NoiseMode::homoscedastic;
      else if (s == "heteroscedastic") c.dgp.noise = NoiseMode::heteroscedastic;
      else throw InputError("noise must be homoscedastic or heteroscedastic");
    }
    if (j.contains("control")) {
      const auto s = j["control"].get<std::string>();
      if (s == "zero") c.dgp.control = ControlMode::zero;
      else if (s == "two-arm") c.dgp.control = ControlMode::two_arm;
      else throw InputError("control must be zero or two-arm");
    }
    if (j.contains("gammas")) c.gammas = j["gammas"].get<std::vector<double>>();
    if (j.contains("alpha")) c.alpha = j["alpha"].get<double>();
    if (j.contains("methods")) {
      c.methods.clear();
      for (const auto& m : j["methods"]) c.methods.push_back(parse_method(m.get<std::string>()));
    }
    if (j.contains("n_train")) c.n_train = j["n_train"].get<std::size_t>();
    if (j.contains("n_target")) c.n_target = j["n_target"].get<std::size_t>();
    if (j.contains("n_trials")) c.n_trials = j["n_trials"].get<std::size_t>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("model")) {
      const auto& m = j["model"];
      if (m.contains("mean")) {
        const auto s = m["mean"].get<std::string>();
        if (s == "knn") c.model.mean_kind = ModelKind::knn;
        else if (s == "linear") c.model.mean_kind = ModelKind::linear;
        else throw InputError("model.mean must be knn or linear");
      }
      if (m.contains("k")) c.model.k = m["k"].get<std::size_t>();
      if (m.contains("ridge")) c.model.ridge = m["ridge"].get<double>();
      if (m.contains("l2")) c.model.l2 = m["l2"].get<double>();
      if (m.contains("step")) c.model.step = m["step"].get<double>();
      if (m.contains("iterations")) c.model.iterations = m["iterations"].get<int>();
      if (m.contains("clip")) c.model.clip = m["clip"].get<double>();
    }
    if (j.contains("prelim_fraction")) c.prelim_fraction = j["prelim_fraction"].get<double>();
    if (j.contains("cssa_slack")) c.cssa_slack = j["cssa_slack"].get<double>();
    if (j.contains("shrink_factors")) c.shrink_factors = j["shrink_factors"].get<std::vector<double>>();
    if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
  } catch (const json::exception& e) {
    throw InputError(std::string("bad config value: ") + e.what());
  }
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return experiment_config_from_json(ss.str());
}

std::string experiment_config_to_json(const ExperimentConfig& cfg) { return to_json(cfg).dump(2); }

void write_manifest(const ExperimentConfig& cfg, const std::filesystem::path& path) {
  json j;
  j["config"] = to_json(cfg);
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < cfg.n_trials; ++i) seeds.push_back(cfg.seed + i);
  j["trial_seeds"] = seeds;
  j["version"] = "0.1.0";
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

std::filesystem::path resolve_output_dir(const std::string& configured) {
  if (const char* env = std::getenv("CONFSA_OUTPUT_DIR"); env && *env) return env;
  return configured.empty() ? std::filesystem::path(".") : std::filesystem::path(configured);
}

}  // namespace confsa
