#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>

#include "confsa/csa.hpp"
#include "confsa/cssa.hpp"
#include "confsa/dataset.hpp"
#include "confsa/error.hpp"
#include "confsa/harness.hpp"
#include "confsa/ite.hpp"
#include "confsa/msm.hpp"
#include "confsa/oracle.hpp"

using namespace confsa;

namespace {

struct Output {
  std::ofstream file;
  std::ostream* os = &std::cout;
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    file.open(p);
    if (!file) throw InputError("cannot write " + path);
    os = &file;
  }
  std::ostream& operator*() { return *os; }
};

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return format_double(v);
}

NoiseMode parse_noise(const std::string& s) {
  if (s == "homoscedastic") return NoiseMode::homoscedastic;
  if (s == "heteroscedastic") return NoiseMode::heteroscedastic;
  throw InputError("noise must be homoscedastic or heteroscedastic");
}

ControlMode parse_control(const std::string& s) {
  if (s == "zero") return ControlMode::zero;
  if (s == "two-arm") return ControlMode::two_arm;
  throw InputError("control must be zero or two-arm");
}

ModelKind parse_kind(const std::string& s) {
  if (s == "knn") return ModelKind::knn;
  if (s == "linear") return ModelKind::linear;
  throw InputError("mean model must be knn or linear");
}

struct ModelFlags {
  std::string mean = "knn";
  std::size_t k = 0;
  double clip = 0.01;
  std::uint64_t seed = 1;

  void attach(CLI::App* app) {
    app->add_option("--mean", mean, "mean model: knn or linear");
    app->add_option("--k", k, "neighbors (0 = sqrt of training size)");
    app->add_option("--clip", clip, "propensity clip floor");
    app->add_option("--seed", seed, "split seed");
  }
  ModelConfig config() const {
    ModelConfig c;
    c.mean_kind = parse_kind(mean);
    c.k = k;
    c.clip = clip;
    c.seed = seed;
    return c;
  }
};

struct Fitted {
  ObservationalDataset ds;
  SplitPlan plan;
  PropensityModel prop;
};

Fitted prepare(const std::string& path, double prelim, const ModelConfig& cfg) {
  Fitted f;
  f.ds = ingest_csv(path);
  f.plan = split(f.ds, {prelim, 1.0 - prelim}, cfg.seed);
  f.prop = fit_propensity(f.ds.covariates(f.plan.preliminary()),
                          f.ds.treatments(f.plan.preliminary()), cfg);
  return f;
}

int cmd_generate(std::size_t n, bool until_treated, std::uint64_t seed, const std::string& noise,
                 const std::string& control, std::size_t dim, const std::string& out_dir) {
  SyntheticDGP dgp;
  dgp.dim = dim;
  dgp.noise = parse_noise(noise);
  dgp.control = parse_control(control);
  const GeneratedData g = until_treated ? generate_until_treated(dgp, n, seed) : generate(dgp, n, seed);
  const auto dir = resolve_output_dir(out_dir);
  std::filesystem::create_directories(dir);
  write_csv(g.data, dir / "data.csv");
  write_truth_csv(g, dir / "truth.csv");
  std::cerr << "wrote " << g.data.size() << " units to " << dir.string() << "\n";
  return 0;
}

int cmd_fit(const std::string& data, const std::string& query, int arm,
            const ModelFlags& mf, const std::string& out) {
  const ModelConfig cfg = mf.config();
  const ObservationalDataset ds = ingest_csv(data);
  const PropensityModel prop = fit_propensity(ds.covariates(), ds.treatments(), cfg);
  const IndexSet idx = arm_indices(ds, arm);
  const MeanPredictor mu = fit_mean(ds.covariates(idx), ds.outcomes(idx), cfg);
  const ObservationalDataset q = query.empty() ? ds : ingest_csv(query);
  if (q.covariate_dim() != ds.covariate_dim()) throw InputError("query covariate count differs from training data");
  Output o(out);
  *o << "id,e_hat,mu_hat\n";
  for (std::size_t i = 0; i < q.size(); ++i)
    *o << i << ',' << num(prop.predict(q[i].covariates)) << ',' << num(mu.predict(q[i].covariates)) << '\n';
  return 0;
}

int cmd_interval(const std::string& data, const std::string& targets, const std::string& method,
                 double gamma, double alpha, int arm, double prelim, const ModelFlags& mf,
                 const std::string& out) {
  SensitivitySpec spec{gamma, alpha, arm, mf.clip};
  spec.validate();
  const Method m = parse_method(method);
  if (m != Method::csa_m && m != Method::csa_q && m != Method::cssa_m)
    throw InputError("interval supports csa-m, csa-q and cssa-m");
  const ModelConfig cfg = mf.config();
  const Fitted f = prepare(data, prelim, cfg);
  const ScoreKind kind = m == Method::csa_q ? ScoreKind::cqr : ScoreKind::mean;
  const ArmFit fit = fit_arm(f.ds, f.plan.preliminary(), f.plan.calibration(), arm, kind, alpha, cfg, f.prop);
  const CsaProblem problem = fit.same_arm_problem(gamma);
  std::unique_ptr<CssaTable> table;
  if (m == Method::cssa_m)
    table = std::make_unique<CssaTable>(
        problem, sort_constraint(problem, propensity_balance(fit.fold_e, fit.fold_t, arm)), alpha,
        CssaOptions{});
  const ObservationalDataset tg = ingest_csv(targets);
  if (tg.covariate_dim() != f.ds.covariate_dim()) throw InputError("target covariate count differs from training data");

  Output o(out);
  *o << "target_id,lower,upper,method,gamma,alpha\n";
  bool warned = false;
  for (std::size_t j = 0; j < tg.size(); ++j) {
    const auto& x = tg[j].covariates;
    const WeightPair wb = weight_bounds_same_arm(f.prop.predict(x), gamma, arm, fit.p_t);
    PredictiveInterval c;
    if (table) {
      const CssaResult r = table->threshold(wb);
      if (r.fell_back && !warned) {
        std::cerr << "warning: " << r.warning << "\n";
        warned = true;
      }
      c = assemble_interval(fit.center(x), r.threshold);
    } else {
      c = csa_interval(problem, fit.center(x), wb, alpha);
    }
    *o << j << ',' << num(c.lower_unbounded ? -INFINITY : c.lower) << ','
       << num(c.upper_unbounded ? INFINITY : c.upper) << ',' << method << ',' << num(gamma) << ','
       << num(alpha) << '\n';
  }
  return 0;
}

int cmd_ite(const std::string& data, const std::string& targets, const std::string& method,
            double gamma, double alpha, double prelim, const ModelFlags& mf, const std::string& out) {
  SensitivitySpec spec{gamma, alpha, 1, mf.clip};
  spec.validate();
  const Method m = parse_method(method);
  if (m != Method::bonferroni && m != Method::nested)
    throw InputError("ite supports bonferroni and nested");
  const ModelConfig cfg = mf.config();
  const ObservationalDataset tg = ingest_csv(targets);
  std::vector<IteInterval> res;
  if (m == Method::bonferroni) {
    const Fitted f = prepare(data, prelim, cfg);
    if (tg.covariate_dim() != f.ds.covariate_dim()) throw InputError("target covariate count differs from training data");
    const double half = alpha / 2.0;
    const ArmFit a1 = fit_arm(f.ds, f.plan.preliminary(), f.plan.calibration(), 1, ScoreKind::mean, half, cfg, f.prop);
    const ArmFit a0 = fit_arm(f.ds, f.plan.preliminary(), f.plan.calibration(), 0, ScoreKind::mean, half, cfg, f.prop);
    const CsaProblem p1 = a1.same_arm_problem(gamma), p0 = a0.same_arm_problem(gamma);
    for (std::size_t j = 0; j < tg.size(); ++j) {
      const auto& x = tg[j].covariates;
      const double e = f.prop.predict(x);
      res.push_back(bonferroni_ite(csa_interval(p1, a1.center(x), weight_bounds_same_arm(e, gamma, 1, a1.p_t), half),
                                   csa_interval(p0, a0.center(x), weight_bounds_same_arm(e, gamma, 0, a0.p_t), half),
                                   half, half));
    }
  } else {
    const ObservationalDataset ds = ingest_csv(data);
    if (tg.covariate_dim() != ds.covariate_dim()) throw InputError("target covariate count differs from training data");
    const SplitPlan plan = split(ds, {0.5, 0.5}, cfg.seed);
    NestedConfig nc;
    nc.model = cfg;
    nc.prelim_fraction = prelim;
    nc.seed = cfg.seed;
    const NestedIteModel model = nested_ite_train(ds, plan.sets[0], plan.sets[1], spec, nc);
    for (std::size_t j = 0; j < tg.size(); ++j) res.push_back(nested_ite_predict(model, tg[j].covariates));
  }
  Output o(out);
  *o << "target_id,lower,upper,method,gamma,alpha\n";
  std::size_t swapped = 0;
  for (std::size_t j = 0; j < res.size(); ++j) {
    const auto& c = res[j];
    swapped += c.swapped;
    *o << j << ',' << num(c.lower_unbounded ? -INFINITY : c.lower) << ','
       << num(c.upper_unbounded ? INFINITY : c.upper) << ',' << method << ',' << num(gamma) << ','
       << num(alpha) << '\n';
  }
  if (swapped) std::cerr << "warning: " << swapped << " targets had crossed endpoint models\n";
  return 0;
}

int cmd_calibrate(const std::string& data, const ModelFlags& mf, const std::string& out) {
  const ObservationalDataset ds = ingest_csv(data);
  const GammaCalibration cal = calibrate_gamma(ds, mf.config());
  Output o(out);
  *o << "covariate,median,p90,p99\n";
  for (const auto& s : cal.summary)
    *o << s.label << ',' << num(s.median) << ',' << num(s.p90) << ',' << num(s.p99) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conformal sensitivity analysis for individual treatment effects"};
  app.require_subcommand(1);

  // generate
  std::size_t gen_n = 2000, gen_dim = 20;
  bool gen_until = false;
  std::uint64_t gen_seed = 1;
  std::string gen_noise = "homoscedastic", gen_control = "zero", gen_out;
  auto* gen = app.add_subcommand("generate", "draw a synthetic observational dataset");
  gen->add_option("--n", gen_n, "number of units");
  gen->add_flag("--until-treated", gen_until, "draw until --n treated units are seen");
  gen->add_option("--seed", gen_seed);
  gen->add_option("--noise", gen_noise, "homoscedastic or heteroscedastic");
  gen->add_option("--control", gen_control, "zero or two-arm");
  gen->add_option("--dim", gen_dim);
  gen->add_option("--out-dir", gen_out);

  // shared flags
  std::string data, targets, query, method, out;
  double gamma = 1.0, alpha = 0.2, prelim = 0.75;
  int arm = 1;
  ModelFlags fit_mf, int_mf, ite_mf, cal_mf;

  auto* fit = app.add_subcommand("fit", "fit propensity and mean models; print predictions");
  fit->add_option("--data", data)->required()->check(CLI::ExistingFile);
  fit->add_option("--query", query, "covariates to predict at (default: training rows)");
  fit->add_option("--arm", arm)->check(CLI::Range(0, 1));
  fit->add_option("--out", out);
  fit_mf.attach(fit);

  auto* itv = app.add_subcommand("interval", "per-target sensitivity intervals for one arm");
  itv->add_option("--data", data)->required()->check(CLI::ExistingFile);
  itv->add_option("--targets", targets)->required()->check(CLI::ExistingFile);
  itv->add_option("--method", method)->required();
  itv->add_option("--gamma", gamma);
  itv->add_option("--alpha", alpha);
  itv->add_option("--arm", arm)->check(CLI::Range(0, 1));
  itv->add_option("--prelim-fraction", prelim);
  itv->add_option("--out", out);
  int_mf.attach(itv);

  auto* ite = app.add_subcommand("ite", "per-target ITE intervals");
  ite->add_option("--data", data)->required()->check(CLI::ExistingFile);
  ite->add_option("--targets", targets)->required()->check(CLI::ExistingFile);
  ite->add_option("--method", method, "bonferroni or nested")->required();
  ite->add_option("--gamma", gamma);
  ite->add_option("--alpha", alpha);
  ite->add_option("--prelim-fraction", prelim);
  ite->add_option("--out", out);
  ite_mf.attach(ite);

  std::string config_path, sw_methods, sw_noise, sw_control, sw_mean, sw_out;
  std::vector<double> sw_gammas;
  std::size_t sw_trials = 0, sw_train = 0, sw_target = 0;
  std::uint64_t sw_seed = 0;
  bool full_scale = false;
  auto* sweep = app.add_subcommand("sweep", "coverage and width sweep over a gamma grid");
  sweep->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  sweep->add_flag("--full-scale", full_scale, "n_train 3000, n_target 10000, 100 trials");
  sweep->add_option("--methods", sw_methods, "comma separated method names");
  sweep->add_option("--gammas", sw_gammas)->delimiter(',');
  sweep->add_option("--trials", sw_trials);
  sweep->add_option("--n-train", sw_train);
  sweep->add_option("--n-target", sw_target);
  sweep->add_option("--seed", sw_seed);
  sweep->add_option("--noise", sw_noise);
  sweep->add_option("--control", sw_control);
  sweep->add_option("--mean", sw_mean);
  sweep->add_option("--out-dir", sw_out);

  auto* cal = app.add_subcommand("calibrate", "leave-one-covariate-out gamma summary");
  cal->add_option("--data", data)->required()->check(CLI::ExistingFile);
  cal->add_option("--out", out);
  cal_mf.attach(cal);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return cmd_generate(gen_n, gen_until, gen_seed, gen_noise, gen_control, gen_dim, gen_out);
    if (*fit) return cmd_fit(data, query, arm, fit_mf, out);
    if (*itv) return cmd_interval(data, targets, method, gamma, alpha, arm, prelim, int_mf, out);
    if (*ite) return cmd_ite(data, targets, method, gamma, alpha, prelim, ite_mf, out);
    if (*cal) return cmd_calibrate(data, cal_mf, out);
    if (*sweep) {
      ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : load_experiment_config(config_path);
      if (full_scale) cfg.apply_full_scale();
      if (!sw_methods.empty()) {
        cfg.methods.clear();
        std::stringstream ss(sw_methods);
        for (std::string tok; std::getline(ss, tok, ',');) cfg.methods.push_back(parse_method(tok));
      }
      if (!sw_gammas.empty()) cfg.gammas = sw_gammas;
      if (sw_trials) cfg.n_trials = sw_trials;
      if (sw_train) cfg.n_train = sw_train;
      if (sw_target) cfg.n_target = sw_target;
      if (sweep->count("--seed")) cfg.seed = sw_seed;
      if (!sw_noise.empty()) cfg.dgp.noise = parse_noise(sw_noise);
      if (!sw_control.empty()) cfg.dgp.control = parse_control(sw_control);
      if (!sw_mean.empty()) cfg.model.mean_kind = parse_kind(sw_mean);
      if (!sw_out.empty()) cfg.output_dir = sw_out;
      cfg.validate();

      const SweepResult res = run_sweep(cfg);
      const auto dir = resolve_output_dir(cfg.output_dir);
      write_sweep_csv(res, dir / "sweep.csv");
      write_records_csv(res, dir / "records.csv");
      write_manifest(cfg, dir / "manifest.json");
      for (double g : cfg.gammas) {
        if (g != 4.0) continue;
        std::vector<TrialRecord> recs;
        for (const auto& r : res.records)
          if (r.method == Method::csa_m && r.gamma == g) recs.push_back(r);
        if (recs.empty()) break;
        const ShrinkageTable t = shrinkage_sharpness(recs, cfg.shrink_factors, cfg.alpha);
        write_shrinkage_csv(t, dir / "shrinkage.csv");
        std::cerr << "max coverage-preserving shrink factor: " << t.max_factor << "\n";
      }
      for (const auto& r : res.rows)
        std::cout << to_string(r.method) << " gamma=" << r.gamma << " coverage=" << r.coverage_mean
                  << " (" << r.coverage_sd << ") width=" << r.width_mean << "\n";
      return 0;
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
