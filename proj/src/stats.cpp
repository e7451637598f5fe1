#include "convodiv/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "convodiv/errors.hpp"
#include "convodiv/rng.hpp"

namespace convodiv::stats {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double binom_log_pmf(int k, int n, double p0) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
         k * std::log(p0) + (n - k) * std::log1p(-p0);
}

TestResult binom_test_two_sided(int k, int n, double p0) {
  if (n < 1 || k < 0 || k > n) throw ParameterError("binom_test: need 0 <= k <= n, n >= 1");
  if (!(p0 > 0.0 && p0 < 1.0)) throw ParameterError("binom_test: p0 must be in (0,1)");
  const double log_pk = binom_log_pmf(k, n, p0);
  const double cutoff = log_pk + std::log1p(1e-12);
  double p = 0.0;
  for (int j = 0; j <= n; ++j) {
    const double lp = binom_log_pmf(j, n, p0);
    if (lp <= cutoff) p += std::exp(lp);
  }
  TestResult r;
  r.statistic = static_cast<double>(k);
  r.p_value = std::min(1.0, p);
  r.n_a = n;
  r.n_b = 0;
  return r;
}

std::vector<double> midranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = mid;
    i = j + 1;
  }
  return ranks;
}

namespace {

// Exact two-sided p by enumerating every assignment of group labels to the
// combined sample: the fraction of assignments at least as extreme (in
// |U - mu|) as the observed one. Used below the small-sample cutoff, where
// the normal approximation is too coarse.
double exact_mwu_p(const std::vector<double>& ranks, std::size_t na, double u_obs, double mu) {
  const std::size_t n = ranks.size();
  const double dev = std::abs(u_obs - mu) - 1e-9;
  std::vector<bool> pick(n, false);
  std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(na), true);
  std::sort(pick.begin(), pick.end());
  long long total = 0, extreme = 0;
  do {
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (pick[i]) rank_sum += ranks[i];
    const double u = rank_sum - static_cast<double>(na) * (na + 1) / 2.0;
    ++total;
    if (std::abs(u - mu) >= dev) ++extreme;
  } while (std::next_permutation(pick.begin(), pick.end()));
  return static_cast<double>(extreme) / static_cast<double>(total);
}

}  // namespace

TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ParameterError("mann_whitney_u: empty sample");
  const std::size_t na = a.size(), nb = b.size(), n = na + nb;
  std::vector<double> combined;
  combined.reserve(n);
  combined.insert(combined.end(), a.begin(), a.end());
  combined.insert(combined.end(), b.begin(), b.end());
  const std::vector<double> ranks = midranks(combined);

  double rank_sum_a = 0.0;
  for (std::size_t i = 0; i < na; ++i) rank_sum_a += ranks[i];
  const double u_a = rank_sum_a - static_cast<double>(na) * (na + 1) / 2.0;

  // Tie correction over rank groups of the combined sample.
  std::vector<double> sorted(combined);
  std::sort(sorted.begin(), sorted.end());
  double tie_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && sorted[j + 1] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i + 1);
    tie_sum += t * t * t - t;
    i = j + 1;
  }

  const double mu = static_cast<double>(na) * static_cast<double>(nb) / 2.0;
  const double nn = static_cast<double>(n);
  double sigma2 = (static_cast<double>(na) * static_cast<double>(nb) / 12.0) *
                  ((nn + 1.0) - tie_sum / (nn * (nn - 1.0)));

  TestResult r;
  r.statistic = u_a;
  r.n_a = static_cast<int>(na);
  r.n_b = static_cast<int>(nb);
  if (sigma2 <= 0.0) {
    r.p_value = 1.0;  // all observations tied
    return r;
  }
  if (na <= 8 && nb <= 8) {
    r.p_value = exact_mwu_p(ranks, na, u_a, mu);
    return r;
  }
  const double z = std::max(0.0, std::abs(u_a - mu) - 0.5) / std::sqrt(sigma2);
  r.p_value = std::min(1.0, 2.0 * (1.0 - normal_cdf(z)));
  return r;
}

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 3)
    throw ParameterError("spearman: need equally sized samples with n >= 3");
  const std::vector<double> rx = midranks(x);
  const std::vector<double> ry = midranks(y);
  const std::size_t n = rx.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = rx[i] - mx, dy = ry[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

Interval bootstrap_mean_ci(std::span<const double> values, std::mt19937_64& gen, int n_resamples,
                           double level) {
  if (values.empty()) throw ParameterError("bootstrap_mean_ci: empty sample");
  if (n_resamples < 1) throw ParameterError("bootstrap_mean_ci: n_resamples must be >= 1");
  if (!(level > 0.0 && level < 1.0)) throw ParameterError("bootstrap_mean_ci: level in (0,1)");
  const std::size_t n = values.size();
  std::vector<double> means(static_cast<std::size_t>(n_resamples));
  for (auto& m : means) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      sum += values[static_cast<std::size_t>(rng::uniform_below(gen, n))];
    m = sum / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(means.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, means.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return means[lo] * (1.0 - frac) + means[hi] * frac;
  };
  const double alpha = 1.0 - level;
  return Interval{quantile(alpha / 2.0), quantile(1.0 - alpha / 2.0)};
}

}  // namespace convodiv::stats
