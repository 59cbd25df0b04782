#pragma once

// Small statistics toolbox shared by the oracle comparisons and the
// coupling/mixing experiments: chi-square p-values, sign tests, Poisson
// dispersion checks and least-squares fits.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace ffg::stats {

inline double mean(const std::vector<double>& xs) {
  double s = 0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

inline double variance(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double m = mean(xs), s = 0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

// Regularized upper incomplete gamma Q(a,x), series + continued fraction.
inline double gamma_q(double a, double x) {
  if (x < 0 || a <= 0) return std::numeric_limits<double>::quiet_NaN();
  if (x == 0) return 1.0;
  const double gln = std::lgamma(a);
  if (x < a + 1.0) {  // series for P, return 1-P
    double ap = a, sum = 1.0 / a, del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
    }
    return 1.0 - sum * std::exp(-x + a * std::log(x) - gln);
  }
  // Lentz continued fraction for Q
  const double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i <= 500; ++i) {
    double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - gln) * h;
}

inline double chi_square_pvalue(double statistic, double dof) {
  if (dof <= 0) return 1.0;
  return gamma_q(dof / 2.0, statistic / 2.0);
}

struct ChiSquare {
  double statistic = 0;
  double dof = 0;
  double p_value = 1;
};

// observed counts vs expected counts; bins with expected < min_expected are
// pooled into one remainder bin.
inline ChiSquare chi_square_test(const std::vector<double>& observed,
                                 const std::vector<double>& expected,
                                 double min_expected = 5.0) {
  double pooled_obs = 0, pooled_exp = 0, stat = 0;
  int bins = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (expected[i] < min_expected) {
      pooled_obs += observed[i];
      pooled_exp += expected[i];
    } else {
      double d = observed[i] - expected[i];
      stat += d * d / expected[i];
      ++bins;
    }
  }
  if (pooled_exp > 0) {
    double d = pooled_obs - pooled_exp;
    stat += d * d / pooled_exp;
    ++bins;
  }
  ChiSquare r;
  r.statistic = stat;
  r.dof = std::max(0, bins - 1);
  r.p_value = chi_square_pvalue(stat, r.dof);
  return r;
}

// One-sided sign test: P(Binomial(n, 1/2) >= wins).
inline double sign_test_pvalue(std::uint64_t wins, std::uint64_t n) {
  if (n == 0) return 1.0;
  double p = 0;
  for (std::uint64_t k = wins; k <= n; ++k) {
    double logterm = std::lgamma(static_cast<double>(n) + 1) -
                     std::lgamma(static_cast<double>(k) + 1) -
                     std::lgamma(static_cast<double>(n - k) + 1) -
                     static_cast<double>(n) * std::log(2.0);
    p += std::exp(logterm);
  }
  return std::min(1.0, p);
}

struct LineFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
};

inline LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
  LineFit f;
  const std::size_t n = xs.size();
  if (n < 2) return f;
  double mx = mean(xs), my = mean(ys), sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy == 0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

struct DispersionCheck {
  double sample_mean = 0;
  double sample_variance = 0;
  double mean_z = 0;  // |m - mu| in units of SE
  double var_z = 0;
  bool pass(double nsigma = 3.0) const { return mean_z <= nsigma && var_z <= nsigma; }
};

// Mean and variance of iid Poisson(mu) observations, with z-scores against
// the exact sampling SEs (Var(S^2) ~ (mu + 2 mu^2)/N for Poisson).
inline DispersionCheck poisson_dispersion(const std::vector<double>& counts, double mu) {
  DispersionCheck c;
  const double n = static_cast<double>(counts.size());
  if (n < 2) return c;
  c.sample_mean = mean(counts);
  c.sample_variance = variance(counts);
  double se_mean = std::sqrt(mu / n);
  double se_var = std::sqrt((mu + 2 * mu * mu) / n);
  c.mean_z = std::fabs(c.sample_mean - mu) / se_mean;
  c.var_z = std::fabs(c.sample_variance - mu) / se_var;
  return c;
}

}  // namespace ffg::stats
