#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace comb {

// Statistical utilities for the experiment harness: chi-square and KS
// p-values, Wilson intervals, quantiles, correlation.  Implemented directly
// (series/continued fractions) so results are platform-stable.

namespace detail {

inline double gamma_p_series(double a, double x) {
  double ap = a, sum = 1.0 / a, del = sum;
  for (int i = 0; i < 1000; ++i) {
    ap += 1;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_q_contfrac(double a, double x) {
  double tiny = 1e-300;
  double b = x + 1 - a, c = 1 / tiny, d = 1 / b, h = d;
  for (int i = 1; i <= 1000; ++i) {
    double an = -i * (i - a);
    b += 2;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1) < 1e-15) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace detail

// upper regularized incomplete gamma Q(a, x)
inline double gamma_q(double a, double x) {
  if (x < 0 || a <= 0) throw std::invalid_argument("gamma_q: bad arguments");
  if (x == 0) return 1.0;
  if (x < a + 1) return 1.0 - detail::gamma_p_series(a, x);
  return detail::gamma_q_contfrac(a, x);
}

inline double chi2_pvalue(double stat, int dof) {
  if (dof <= 0) return 1.0;
  return gamma_q(0.5 * dof, 0.5 * stat);
}

// Goodness of fit of observed counts against exact probabilities; bins with
// expected count below min_expected are pooled (deterministically, in input
// order) so the chi-square approximation holds.
struct Chi2Result {
  double stat = 0;
  int dof = 0;
  double pvalue = 1;
  int bins = 0;
};

inline Chi2Result chi2_goodness_of_fit(const std::vector<std::int64_t>& counts,
                                       const std::vector<double>& probs,
                                       double min_expected = 10.0) {
  if (counts.size() != probs.size())
    throw std::invalid_argument("chi2_goodness_of_fit: size mismatch");
  std::int64_t total = 0;
  for (std::int64_t c : counts) total += c;
  double n = static_cast<double>(total);
  std::vector<double> exp_bins;
  std::vector<double> obs_bins;
  double exp_acc = 0, obs_acc = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    exp_acc += probs[i] * n;
    obs_acc += static_cast<double>(counts[i]);
    if (exp_acc >= min_expected) {
      exp_bins.push_back(exp_acc);
      obs_bins.push_back(obs_acc);
      exp_acc = obs_acc = 0;
    }
  }
  if (exp_acc > 0 || obs_acc > 0) {
    if (!exp_bins.empty()) {
      exp_bins.back() += exp_acc;
      obs_bins.back() += obs_acc;
    } else {
      exp_bins.push_back(exp_acc);
      obs_bins.push_back(obs_acc);
    }
  }
  Chi2Result r;
  r.bins = static_cast<int>(exp_bins.size());
  for (std::size_t i = 0; i < exp_bins.size(); ++i) {
    double d = obs_bins[i] - exp_bins[i];
    if (exp_bins[i] > 0) r.stat += d * d / exp_bins[i];
  }
  r.dof = std::max(1, r.bins - 1);
  r.pvalue = chi2_pvalue(r.stat, r.dof);
  return r;
}

// Two-sample chi-square on aligned histograms (bins pooled as above using
// the combined counts).
inline Chi2Result chi2_two_sample(const std::vector<std::int64_t>& a,
                                  const std::vector<std::int64_t>& b,
                                  double min_expected = 10.0) {
  if (a.size() != b.size()) throw std::invalid_argument("chi2_two_sample: size mismatch");
  double na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    na += static_cast<double>(a[i]);
    nb += static_cast<double>(b[i]);
  }
  double ka = std::sqrt(nb / na), kb = std::sqrt(na / nb);
  std::vector<double> pa, pb;
  double acc_a = 0, acc_b = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc_a += static_cast<double>(a[i]);
    acc_b += static_cast<double>(b[i]);
    if (acc_a + acc_b >= 2 * min_expected) {
      pa.push_back(acc_a);
      pb.push_back(acc_b);
      acc_a = acc_b = 0;
    }
  }
  if ((acc_a > 0 || acc_b > 0) && !pa.empty()) {
    pa.back() += acc_a;
    pb.back() += acc_b;
  } else if (acc_a > 0 || acc_b > 0) {
    pa.push_back(acc_a);
    pb.push_back(acc_b);
  }
  Chi2Result r;
  r.bins = static_cast<int>(pa.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    double denom = pa[i] + pb[i];
    if (denom <= 0) continue;
    double d = ka * pa[i] - kb * pb[i];
    r.stat += d * d / denom;
  }
  r.dof = std::max(1, r.bins - 1);
  r.pvalue = chi2_pvalue(r.stat, r.dof);
  return r;
}

// Kolmogorov-Smirnov against a continuous CDF; asymptotic p-value.
inline double ks_pvalue(std::vector<double> samples, const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  double n = static_cast<double>(samples.size());
  double d = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double f = cdf(samples[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  double x = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
  double p = 0;
  for (int k = 1; k <= 100; ++k) {
    double term = 2.0 * (k % 2 == 1 ? 1.0 : -1.0) * std::exp(-2.0 * k * k * x * x);
    p += term;
    if (std::abs(term) < 1e-12) break;
  }
  return std::clamp(p, 0.0, 1.0);
}

struct Interval {
  double lo = 0, hi = 0;
};

// Wilson 95% interval for a proportion
inline Interval wilson_interval(std::int64_t successes, std::int64_t n, double z = 1.959963984540054) {
  if (n <= 0) return {0, 1};
  double nn = static_cast<double>(n);
  double p = static_cast<double>(successes) / nn;
  double denom = 1.0 + z * z / nn;
  double center = (p + z * z / (2 * nn)) / denom;
  double half = z * std::sqrt(p * (1 - p) / nn + z * z / (4 * nn * nn)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw std::invalid_argument("quantile: empty sample");
  std::sort(v.begin(), v.end());
  double pos = q * (static_cast<double>(v.size()) - 1);
  std::size_t i = static_cast<std::size_t>(pos);
  if (i + 1 >= v.size()) return v.back();
  double frac = pos - static_cast<double>(i);
  return v[i] * (1 - frac) + v[i + 1] * frac;
}

inline double pearson_correlation(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("pearson_correlation: bad input");
  double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0 || syy <= 0) return 0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace comb
