#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "confsa/ite.hpp"
#include "confsa/oracle.hpp"
#include "confsa/predictors.hpp"

namespace confsa {

enum class Method { csa_m, csa_q, cssa_m, ite_nuc, bonferroni, nested };

std::string to_string(Method m);
Method parse_method(const std::string& name);  // throws InputError

struct ExperimentConfig {
  SyntheticDGP dgp;
  std::vector<double> gammas{1.0, 1.5, 2.0, 3.0, 4.0};
  double alpha = 0.2;
  std::vector<Method> methods{Method::csa_m, Method::ite_nuc};
  std::size_t n_train = 2000;   // treated units in the observational sample
  std::size_t n_target = 2000;
  std::size_t n_trials = 20;
  std::uint64_t seed = 20240101;
  ModelConfig model;
  double prelim_fraction = 0.75;
  double cssa_slack = 1e-6;
  std::vector<double> shrink_factors;  // empty means 0, 0.01, ..., 0.30
  std::string output_dir;

  void validate() const;
  void apply_full_scale();  // 3000 / 10000 / 100
};

struct TrialRecord {
  Method method = Method::csa_m;
  double gamma = 1.0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::vector<double> lower;  // +-inf when unbounded
  std::vector<double> upper;
  std::vector<double> truth;
  double coverage = 0.0;
  double mean_width = 0.0;
  std::size_t unbounded = 0;
};

struct SweepRow {
  Method method = Method::csa_m;
  double gamma = 1.0;
  double coverage_mean = 0.0;
  double coverage_sd = 0.0;
  double width_mean = 0.0;
  double width_sd = 0.0;
  std::size_t unbounded = 0;
  std::size_t trials = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<TrialRecord> records;

  const SweepRow& row(Method m, double gamma) const;
};

SweepResult run_sweep(const ExperimentConfig& cfg);

struct ShrinkageTable {
  std::vector<double> factors;
  std::vector<double> coverage;
  double max_factor = 0.0;    // largest factor keeping coverage >= 1 - alpha; -1 if none
  std::size_t excluded = 0;   // unbounded intervals left out
};

// Shrinks bounded intervals about their centers by each factor and
// recomputes coverage over all records.
ShrinkageTable shrinkage_sharpness(std::span<const TrialRecord> records,
                                   std::span<const double> factors, double alpha);

struct BetaTrial {
  double coverage = 0.0;
  std::uint64_t calibration_seed = 0;
};

struct BetaCheck {
  double a = 0.0;
  double b = 0.0;
  double ks_statistic = 0.0;
  double p_value = 0.0;
  bool pass = false;
};

// KS test of per-trial coverages against
// Beta(n + 1 - floor((n + 1) alpha), floor((n + 1) alpha)); pass at p >= 0.01.
BetaCheck beta_coverage_check(std::span<const BetaTrial> trials, std::size_t n_cal,
                              double alpha);

struct BetaExperimentConfig {
  SyntheticDGP dgp;
  std::size_t n_cal = 500;
  std::size_t n_trials = 100;
  std::size_t n_prelim = 1500;     // treated units for the outcome model
  std::size_t n_population = 20000;
  double alpha = 0.2;
  bool unit_weights = false;       // negative control: ignore the shift
  // Targets: the control units of the population (Y(1) for the untreated,
  // cross-arm weights) or the whole population (same-arm weights).
  bool control_targets = true;
  std::uint64_t seed = 7;
  ModelConfig model;
};

// Fresh calibration draw per trial; coverage is the exact conditional
// coverage averaged over a fixed population sample.
std::vector<BetaTrial> run_beta_experiment(const BetaExperimentConfig& cfg);

struct PositivitySummary {
  double positive = 0.0;
  double negative = 0.0;
};

PositivitySummary positivity_summary(std::span<const IteInterval> intervals);

// (Gamma / 2) p_t E|1 / (e_hat^t (1 - e_hat)^(1-t)) - 1 / (e^t (1 - e)^(1-t))|
double delta_slack(std::span<const double> e_true, std::span<const double> e_hat, double gamma,
                   int t, double p_t);
// Same, averaged over the arm-t units of a generated dataset.
double delta_slack_diagnostic(const GeneratedData& g, const PropensityModel& propensity,
                              double gamma, int t);

void write_sweep_csv(const SweepResult& r, const std::filesystem::path& path);
void write_records_csv(const SweepResult& r, const std::filesystem::path& path);
void write_shrinkage_csv(const ShrinkageTable& t, const std::filesystem::path& path);
void write_manifest(const ExperimentConfig& cfg, const std::filesystem::path& path);

// JSON config: every field optional, see README for keys.
ExperimentConfig experiment_config_from_json(const std::string& text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
std::string experiment_config_to_json(const ExperimentConfig& cfg);

// Output directory: CONFSA_OUTPUT_DIR if set, else the configured one.
std::filesystem::path resolve_output_dir(const std::string& configured);

}  // namespace confsa
