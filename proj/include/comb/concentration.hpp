#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "comb/harmonic.hpp"
#include "comb/lattice.hpp"
#include "comb/rng.hpp"

namespace comb {

// Concentration for sums of Bernoulli variables.  The family holds the means of the
// components Y_i of L, and the partition A/B splits them at 1 - 1/kappa.
struct BernoulliFamily {
  std::vector<double> means;
  double kappa = 2.0;

  BernoulliFamily(std::vector<double> m, double k) : means(std::move(m)), kappa(k) {
    if (!(kappa > 1.0)) throw std::invalid_argument("BernoulliFamily: kappa must be > 1");
    for (double p : means)
      if (p < 0 || p > 1) throw std::invalid_argument("BernoulliFamily: means must lie in [0,1]");
  }

  std::int64_t size_b() const {
    std::int64_t n = 0;
    double cut = 1.0 - 1.0 / kappa;
    for (double p : means)
      if (p >= cut) ++n;
    return n;
  }
  double sum_sq_a() const {
    double s = 0;
    double cut = 1.0 - 1.0 / kappa;
    for (double p : means)
      if (p < cut) s += p * p;
    return s;
  }
};

// Tail bound with the partitioned variance proxy:
//   P(W <= xi) <= exp(-lambda(mu - xi)
//                     + lambda^2/2 (mu + (4/kappa^2)|B| + kappa sum_A E[Y]^2))
// for 0 <= lambda <= log 2, xi >= 0.
inline double bernoulli_bound(double mu, double xi, double lambda, const BernoulliFamily& fam) {
  if (lambda < 0 || lambda > std::log(2.0))
    throw std::invalid_argument("bernoulli_bound: lambda must lie in [0, log 2]");
  if (xi < 0) throw std::invalid_argument("bernoulli_bound: xi must be >= 0");
  double variance_proxy = mu + 4.0 / (fam.kappa * fam.kappa) * static_cast<double>(fam.size_b()) +
                          fam.kappa * fam.sum_sq_a();
  return std::exp(-lambda * (mu - xi) + 0.5 * lambda * lambda * variance_proxy);
}

// Unpartitioned variant, valid when every mean sits below 1 - 1/kappa:
//   P(W <= xi) <= exp(-lambda(mu - xi) + lambda^2/2 (mu + kappa sum E[Y]^2))
inline double unpartitioned_bound(double mu, double xi, double lambda, const BernoulliFamily& fam) {
  if (fam.size_b() != 0)
    throw std::invalid_argument("unpartitioned_bound: some mean is above 1 - 1/kappa, use bernoulli_bound");
  double s2 = 0;
  for (double p : fam.means) s2 += p * p;
  return std::exp(-lambda * (mu - xi) + 0.5 * lambda * lambda * (mu + fam.kappa * s2));
}

// closed-form unconstrained minimizer clamped to [0, log 2]
inline double optimal_lambda(double mu, double xi, const BernoulliFamily& fam) {
  double variance_proxy = mu + 4.0 / (fam.kappa * fam.kappa) * static_cast<double>(fam.size_b()) +
                          fam.kappa * fam.sum_sq_a();
  if (variance_proxy <= 0) return 0;
  return std::clamp((mu - xi) / variance_proxy, 0.0, std::log(2.0));
}

// Monte Carlo check of the tail bound on a synthetic triple satisfying the
// hypotheses exactly:  Y_i ~ Bern(p_i) build L, independent Z_i ~ Bern(q_i)
// build W, and M_i = max(Y_i, Z_i) <= Y_i + Z_i gives W + L >= M with
// mu = E[M] - E[L] = sum q_i (1 - p_i) >= 0 and W independent of L.
struct TailCheckResult {
  double mu = 0;
  double empirical = 0;
  double bound = 0;
  double lambda_star = 0;
  std::int64_t replicas = 0;
  std::int64_t tail_hits = 0;
};

inline TailCheckResult mc_tail_check(const BernoulliFamily& fam_l,
                                     const std::vector<double>& w_means, double xi,
                                     std::int64_t replicas, std::uint64_t seed) {
  if (w_means.size() != fam_l.means.size())
    throw std::invalid_argument("mc_tail_check: family sizes differ");
  double mu = 0;
  for (std::size_t i = 0; i < w_means.size(); ++i) mu += w_means[i] * (1.0 - fam_l.means[i]);
  if (mu < 0) throw std::invalid_argument("mc_tail_check: constructed mu < 0");
  TailCheckResult out;
  out.mu = mu;
  out.replicas = replicas;
  out.lambda_star = optimal_lambda(mu, xi, fam_l);
  out.bound = bernoulli_bound(mu, xi, out.lambda_star, fam_l);
  for (std::int64_t rep = 0; rep < replicas; ++rep) {
    Rng rng(seed, static_cast<std::uint64_t>(rep));
    double w = 0;
    for (std::size_t i = 0; i < w_means.size(); ++i) {
      // Y_i is drawn too so the triple exists; only W enters the tail
      bool y = rng.bernoulli(fam_l.means[i]);
      bool z = rng.bernoulli(w_means[i]);
      (void)y;
      if (z) w += 1;
    }
    if (w <= xi) ++out.tail_hits;
  }
  out.empirical = static_cast<double>(out.tail_hits) / static_cast<double>(replicas);
  return out;
}

// ---------------------------------------------------------------------------
// mu(z) of the inner estimate (def-hz):
//   mu(z) = (|D(n)| - |D(n-L)|) h_z(0) + MV(h_z, D(n-L)),
// computed exactly from the harmonic module for z on the boundary of D(n-L).
// ---------------------------------------------------------------------------
struct MuReport {
  double n = 0, l = 0;
  Site z{0, 0};
  double h_z0 = 0;
  double volume_term = 0;
  double mv_term = 0;
  double mu = 0;
  double normalized = 0;  // mu / (L (n - L - |X_z|))
};

inline MuReport mu_pipeline(double n, double l, Site z) {
  if (!(l >= 0) || !(n - l > 0)) throw std::invalid_argument("mu_pipeline: need 0 <= L < n");
  Region inner(n - l);
  if (std::abs(z.x) > n - l - 1)
    throw std::invalid_argument("mu_pipeline: need |X_z| <= n - L - 1");
  MuReport out;
  out.n = n;
  out.l = l;
  out.z = z;
  HarmonicField h = boundary_field(inner, z);
  out.h_z0 = h.axis_value(0);
  double vol_n = static_cast<double>(Region(n).volume());
  double vol_inner = static_cast<double>(inner.volume());
  out.volume_term = (vol_n - vol_inner) * out.h_z0;
  out.mv_term = mean_value(h);
  out.mu = out.volume_term + out.mv_term;
  double denom = l * (n - l - std::abs(static_cast<double>(z.x)));
  out.normalized = denom > 0 ? out.mu / denom : 0;
  return out;
}

// Outer-region variant mu*(z): the exit field lives on the enlarged region
// D(n + al), walks from the origin are compared with one walker per site of
// D(n - a0l):
//   mu*(z) = (|D(n)| - |D(n - a0l)|) h_z(0) + MV(h_z, D(n - a0l)).
inline MuReport mu_star_pipeline(double n, double a0l, double al, Site z) {
  if (!(a0l >= 0) || !(al > 0) || !(n - a0l > 0))
    throw std::invalid_argument("mu_star_pipeline: need 0 <= a0*L < n and A*L > 0");
  Region outer(n + al);
  Region depleted(n - a0l);
  MuReport out;
  out.n = n;
  out.l = a0l;
  out.z = z;
  HarmonicField h = boundary_field(outer, z);
  out.h_z0 = h.axis_value(0);
  double vol_n = static_cast<double>(Region(n).volume());
  double vol_dep = static_cast<double>(depleted.volume());
  out.volume_term = (vol_n - vol_dep) * out.h_z0;
  out.mv_term = mean_value(h, depleted);
  out.mu = out.volume_term + out.mv_term;
  double denom = a0l * (n + al - std::abs(static_cast<double>(z.x)));
  out.normalized = denom > 0 ? out.mu / denom : 0;
  return out;
}

}  // namespace comb
