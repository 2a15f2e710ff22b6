#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "confsa/error.hpp"
#include "confsa/harness.hpp"
#include "confsa/random.hpp"

using namespace confsa;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

IteInterval ite(double lo, double hi) {
  IteInterval c;
  c.lower = lo;
  c.upper = hi;
  return c;
}

double median_width(const SweepResult& r, Method m, double gamma) {
  std::vector<double> w;
  for (const auto& rec : r.records)
    if (rec.method == m && rec.gamma == gamma)
      for (std::size_t j = 0; j < rec.lower.size(); ++j) w.push_back(rec.upper[j] - rec.lower[j]);
  std::nth_element(w.begin(), w.begin() + static_cast<long>(w.size() / 2), w.end());
  return w[w.size() / 2];
}

ExperimentConfig desk(std::vector<Method> methods) {
  ExperimentConfig cfg;
  cfg.methods = std::move(methods);
  cfg.model.mean_kind = ModelKind::linear;
  return cfg;
}

}  // namespace

TEST(Config, MethodNames) {
  for (Method m : {Method::csa_m, Method::csa_q, Method::cssa_m, Method::ite_nuc, Method::bonferroni,
                   Method::nested})
    EXPECT_EQ(parse_method(to_string(m)), m);
  EXPECT_THROW(parse_method("csa-x"), InputError);
}

TEST(Config, RejectedBeforeWork) {
  ExperimentConfig cfg;
  cfg.gammas = {1.0, 0.5};
  EXPECT_THROW(run_sweep(cfg), InputError);
  cfg.gammas = {1.0};
  cfg.n_trials = 0;
  EXPECT_THROW(run_sweep(cfg), InputError);
  EXPECT_THROW(experiment_config_from_json(R"({"methods": ["csa-m", "bogus"]})"), InputError);
  EXPECT_THROW(experiment_config_from_json("{not json"), InputError);
}

TEST(Config, JsonRoundTrip) {
  ExperimentConfig cfg;
  cfg.gammas = {1.0, 2.5};
  cfg.methods = {Method::cssa_m, Method::nested};
  cfg.dgp.noise = NoiseMode::heteroscedastic;
  cfg.dgp.control = ControlMode::two_arm;
  cfg.model.mean_kind = ModelKind::linear;
  cfg.seed = 77;
  const ExperimentConfig back = experiment_config_from_json(experiment_config_to_json(cfg));
  EXPECT_EQ(back.gammas, cfg.gammas);
  EXPECT_EQ(back.methods, cfg.methods);
  EXPECT_EQ(back.dgp.noise, cfg.dgp.noise);
  EXPECT_EQ(back.dgp.control, cfg.dgp.control);
  EXPECT_EQ(back.model.mean_kind, cfg.model.mean_kind);
  EXPECT_EQ(back.seed, 77u);
  ExperimentConfig full;
  full.apply_full_scale();
  EXPECT_EQ(full.n_train, 3000u);
  EXPECT_EQ(full.n_target, 10000u);
  EXPECT_EQ(full.n_trials, 100u);
}

TEST(Config, OutputDirFromEnvironment) {
  ::unsetenv("CONFSA_OUTPUT_DIR");
  EXPECT_EQ(resolve_output_dir("out"), std::filesystem::path("out"));
  ::setenv("CONFSA_OUTPUT_DIR", "/tmp/elsewhere", 1);
  EXPECT_EQ(resolve_output_dir("out"), std::filesystem::path("/tmp/elsewhere"));
  ::unsetenv("CONFSA_OUTPUT_DIR");
}

TEST(Sweep, ByteIdenticalTables) {
  ExperimentConfig cfg = desk({Method::csa_m, Method::cssa_m, Method::csa_q});
  cfg.n_trials = 2;
  cfg.n_train = 300;
  cfg.n_target = 200;
  const auto dir = std::filesystem::temp_directory_path() / "confsa_det";
  std::string first;
  for (int run = 0; run < 2; ++run) {
    const SweepResult r = run_sweep(cfg);
    write_sweep_csv(r, dir / "sweep.csv");
    write_records_csv(r, dir / "records.csv");
    const std::string text = slurp(dir / "sweep.csv") + slurp(dir / "records.csv");
    if (run == 0) first = text;
    else EXPECT_EQ(text, first);
  }
  std::filesystem::remove_all(dir);
}

TEST(Sweep, DeskScaleTableValues) {
  const SweepResult r = run_sweep(desk({Method::csa_m, Method::ite_nuc}));
  EXPECT_NEAR(r.row(Method::csa_m, 1.0).coverage_mean, 0.80, 0.03);
  EXPECT_NEAR(r.row(Method::ite_nuc, 4.0).coverage_mean, 0.54, 0.05);
  double prev = 0.0;
  for (double g : {1.0, 2.0, 4.0}) {
    EXPECT_GE(r.row(Method::csa_m, g).width_mean, prev);
    prev = r.row(Method::csa_m, g).width_mean;
  }
  EXPECT_EQ(r.rows.size(), 10u);
  EXPECT_EQ(r.row(Method::csa_m, 2.0).trials, 20u);
}

TEST(Sweep, NestedAtGammaOne) {
  ExperimentConfig cfg = desk({Method::nested});
  cfg.gammas = {1.0, 1.5, 2.0, 3.0};
  const SweepResult r = run_sweep(cfg);
  EXPECT_NEAR(r.row(Method::nested, 1.0).coverage_mean, 0.80, 0.03);
  for (double g : cfg.gammas) EXPECT_GE(r.row(Method::nested, g).coverage_mean, 0.77) << g;
}

TEST(Sweep, BonferroniWiderThanNestedInTwoArmDesign) {
  ExperimentConfig cfg = desk({Method::bonferroni, Method::nested});
  cfg.dgp.control = ControlMode::two_arm;
  cfg.gammas = {1.0, 1.5, 2.0, 3.0};
  cfg.n_trials = 10;
  const SweepResult r = run_sweep(cfg);
  for (double g : cfg.gammas) {
    EXPECT_GE(r.row(Method::bonferroni, g).coverage_mean, 0.80) << g;
    EXPECT_GE(r.row(Method::bonferroni, g).width_mean, r.row(Method::nested, g).width_mean) << g;
    EXPECT_GE(median_width(r, Method::bonferroni, g), median_width(r, Method::nested, g)) << g;
  }
}

TEST(Shrinkage, IdentityAndCollapse) {
  Rng rng = make_rng(1);
  std::normal_distribution<double> z;
  TrialRecord rec;
  for (int i = 0; i < 5000; ++i) {
    rec.lower.push_back(-1.2816);
    rec.upper.push_back(1.2816);
    rec.truth.push_back(z(rng));
  }
  rec.lower.push_back(-std::numeric_limits<double>::infinity());
  rec.upper.push_back(0.0);
  rec.truth.push_back(0.0);
  std::size_t covered = 0;
  for (int i = 0; i < 5000; ++i) covered += std::abs(rec.truth[i]) <= 1.2816;
  const std::vector<TrialRecord> recs{rec};
  const std::vector<double> factors{0.0, 0.1, 0.999999};
  const ShrinkageTable t = shrinkage_sharpness(recs, factors, 0.2);
  EXPECT_DOUBLE_EQ(t.coverage[0], covered / 5000.0);
  EXPECT_LT(t.coverage[2], 0.01);
  EXPECT_EQ(t.excluded, 1u);
  EXPECT_GE(t.coverage[0], t.coverage[1]);
  const ShrinkageTable dflt = shrinkage_sharpness(recs, {}, 0.2);
  EXPECT_EQ(dflt.factors.size(), 31u);
  EXPECT_NEAR(dflt.factors.back(), 0.30, 1e-12);
}

TEST(BetaCheck, ReferenceParameters) {
  std::vector<BetaTrial> trials;
  Rng rng = make_rng(2);
  std::gamma_distribution<double> ga(2.0), gb(2.0);
  for (std::uint64_t i = 0; i < 100; ++i) {
    const double a = ga(rng), b = gb(rng);
    trials.push_back({a / (a + b), i});
  }
  const BetaCheck c = beta_coverage_check(trials, 3, 0.5);
  EXPECT_DOUBLE_EQ(c.a, 2.0);
  EXPECT_DOUBLE_EQ(c.b, 2.0);
  EXPECT_TRUE(c.pass);
}

TEST(BetaCheck, RejectsWrongLawAndBadInput) {
  std::vector<BetaTrial> trials;
  for (std::uint64_t i = 0; i < 100; ++i) trials.push_back({0.75 + 0.001 * (i % 10), i});
  EXPECT_FALSE(beta_coverage_check(trials, 500, 0.2).pass);
  trials[5].calibration_seed = trials[4].calibration_seed;
  EXPECT_THROW(beta_coverage_check(trials, 500, 0.2), ContractError);
  trials.resize(40);
  EXPECT_THROW(beta_coverage_check(trials, 500, 0.2), ContractError);
}

TEST(Positivity, Fractions) {
  const std::vector<IteInterval> pos(4, ite(1, 2)), neg(3, ite(-2, -1));
  EXPECT_DOUBLE_EQ(positivity_summary(pos).positive, 1.0);
  EXPECT_DOUBLE_EQ(positivity_summary(pos).negative, 0.0);
  EXPECT_DOUBLE_EQ(positivity_summary(neg).positive, 0.0);
  EXPECT_DOUBLE_EQ(positivity_summary(neg).negative, 1.0);
  const std::vector<IteInterval> mixed{ite(1, 2), ite(-1, 1)};
  EXPECT_DOUBLE_EQ(positivity_summary(mixed).positive, 0.5);
  EXPECT_DOUBLE_EQ(positivity_summary(mixed).negative, 0.0);
  auto open = ite(1, 0);
  open.upper_unbounded = true;
  const std::vector<IteInterval> one{open};
  EXPECT_DOUBLE_EQ(positivity_summary(one).positive, 0.0);
}

TEST(DeltaSlack, HandValues) {
  const std::vector<double> e(10, 0.5), eh(10, 0.55);
  EXPECT_DOUBLE_EQ(delta_slack(e, e, 2.0, 1, 0.5), 0.0);
  EXPECT_NEAR(delta_slack(e, eh, 2.0, 1, 0.5), 0.5 * (2.0 - 1.0 / 0.55), 1e-12);
  EXPECT_NEAR(delta_slack(e, eh, 2.0, 1, 0.5), 0.0909, 1e-4);
  double prev = -1.0;
  for (double g : {1.0, 2.0, 3.0}) {
    const double d = delta_slack(e, eh, g, 1, 0.5);
    EXPECT_GE(d, prev);
    prev = d;
  }
}

TEST(DeltaSlack, NeedsTruth) {
  const GeneratedData g = generate(SyntheticDGP{}, 400, 3);
  const PropensityModel prop = fit_propensity(g.data.covariates(), g.data.treatments(), {});
  const double d1 = delta_slack_diagnostic(g, prop, 1.0, 1);
  EXPECT_GT(d1, 0.0);
  EXPECT_NEAR(delta_slack_diagnostic(g, prop, 3.0, 1), 3.0 * d1, 1e-12);
  GeneratedData blind;
  blind.data = g.data;
  EXPECT_THROW(delta_slack_diagnostic(blind, prop, 2.0, 1), ContractError);
}

TEST(BetaExperiment, FreshCalibrationPerTrial) {
  BetaExperimentConfig cfg;
  cfg.n_trials = 8;
  cfg.n_population = 2000;
  cfg.n_prelim = 400;
  for (bool controls : {true, false}) {
    cfg.control_targets = controls;
    const auto trials = run_beta_experiment(cfg);
    ASSERT_EQ(trials.size(), 8u);
    std::set<std::uint64_t> seeds;
    for (const auto& t : trials) {
      seeds.insert(t.calibration_seed);
      EXPECT_GT(t.coverage, 0.7);
      EXPECT_LT(t.coverage, 0.9);
    }
    EXPECT_EQ(seeds.size(), 8u);
    EXPECT_EQ(run_beta_experiment(cfg)[3].coverage, trials[3].coverage);
  }
}
