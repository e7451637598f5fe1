#pragma once

#include <optional>
#include <random>
#include <span>
#include <vector>

namespace convodiv::stats {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  int n_a = 0;
  int n_b = 0;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Standard normal CDF.
double normal_cdf(double z);

// log of the binomial pmf at k.
double binom_log_pmf(int k, int n, double p0);

// Exact two-sided test by the small-pmf method: the p-value sums pmf(j) over
// all j whose pmf does not exceed pmf(k) (up to a 1e-12 relative slack).
TestResult binom_test_two_sided(int k, int n, double p0);

// 1-based midranks (ties share the average of their rank range).
std::vector<double> midranks(std::span<const double> values);

// U statistic for sample a from rank sums; two-sided p via the normal
// approximation with tie and continuity corrections.
TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b);

// Pearson correlation of midranks; nullopt when either input has constant
// ranks (correlation undefined).
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

// Percentile bootstrap interval for the mean. Deterministic given the
// generator state.
Interval bootstrap_mean_ci(std::span<const double> values, std::mt19937_64& gen,
                           int n_resamples = 1000, double level = 0.95);

}  // namespace convodiv::stats
