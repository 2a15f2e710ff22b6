#pragma once

#include <functional>
#include <span>
#include <vector>

namespace confsa::stats {

double mean(std::span<const double> v);
double sd(std::span<const double> v);  // sample standard deviation
// inf{v : F_n(v) >= q} on a copy of the data.
double empirical_quantile(std::vector<double> v, double q);

double normal_cdf(double z);
double normal_quantile(double p);
double beta_cdf(double x, double a, double b);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// One-sample Kolmogorov-Smirnov test against a continuous CDF.
KsResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf);

// P(sqrt(n) D_n > x) with the small-sample adjustment of Stephens.
double kolmogorov_pvalue(double d, std::size_t n);

}  // namespace confsa::stats
