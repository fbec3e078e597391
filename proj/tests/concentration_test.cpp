#include <doctest.h>

#include <cmath>

#include "comb/concentration.hpp"
#include "comb/rng.hpp"

using namespace comb;

TEST_CASE("bernoulli bound spot values") {
  // mu=10, xi=0, |B|=0, sum_A E^2 = 5, kappa=2, lambda=0.5 -> exp(-2.5)
  BernoulliFamily fam(std::vector<double>(45, 1.0 / 3.0), 2.0);
  CHECK(fam.size_b() == 0);
  CHECK(fam.sum_sq_a() == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(bernoulli_bound(10.0, 0.0, 0.5, fam) == doctest::Approx(std::exp(-2.5)).epsilon(1e-12));
  CHECK(bernoulli_bound(10.0, 0.0, 0.0, fam) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(bernoulli_bound(10.0, 0.0, 0.8, fam), std::invalid_argument);
  CHECK_THROWS_AS(bernoulli_bound(10.0, -1.0, 0.5, fam), std::invalid_argument);
}

TEST_CASE("partition A/B at the 1 - 1/kappa cut") {
  BernoulliFamily fam({0.1, 0.9, 0.74, 0.76, 0.5}, 4.0);  // cut at 0.75
  CHECK(fam.size_b() == 2);
  CHECK(fam.sum_sq_a() == doctest::Approx(0.1 * 0.1 + 0.74 * 0.74 + 0.25).epsilon(1e-12));
  CHECK_THROWS_AS(BernoulliFamily({0.5}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(BernoulliFamily({1.5}, 2.0), std::invalid_argument);
}

TEST_CASE("optimal lambda beats a random grid") {
  BernoulliFamily fam({0.2, 0.4, 0.9, 0.9, 0.3}, 4.0);
  double mu = 3.0, xi = 0.5;
  double lstar = optimal_lambda(mu, xi, fam);
  double best = bernoulli_bound(mu, xi, lstar, fam);
  Rng rng(17, 0);
  for (int i = 0; i < 50; ++i) {
    double l = rng.next_double() * std::log(2.0);
    CHECK(best <= bernoulli_bound(mu, xi, l, fam) + 1e-12);
  }
}

TEST_CASE("bound monotonicity: grows with xi, shrinks with mu at lambda*") {
  // P(W <= xi) grows with xi, so a valid upper bound must too
  BernoulliFamily fam({0.3, 0.3, 0.3, 0.9}, 4.0);
  double prev = 0.0;
  for (double xi : {0.0, 0.5, 1.0, 1.5}) {
    double b = bernoulli_bound(2.0, xi, 0.3, fam);
    CHECK(b >= prev - 1e-15);
    prev = b;
  }
  double b1 = bernoulli_bound(2.0, 0.0, optimal_lambda(2.0, 0.0, fam), fam);
  double b2 = bernoulli_bound(3.0, 0.0, optimal_lambda(3.0, 0.0, fam), fam);
  CHECK(b2 <= b1 + 1e-12);
}

TEST_CASE("unpartitioned variant needs every mean below the cut") {
  BernoulliFamily ok({0.1, 0.2}, 2.0);
  CHECK(unpartitioned_bound(1.0, 0.0, 0.5, ok) ==
        doctest::Approx(std::exp(-0.5 + 0.125 * (1.0 + 2.0 * 0.05))).epsilon(1e-12));
  BernoulliFamily bad({0.9}, 2.0);
  CHECK_THROWS_AS(unpartitioned_bound(1.0, 0.0, 0.5, bad), std::invalid_argument);
}

TEST_CASE("degenerate L: tail equals the binomial and the bound dominates") {
  std::vector<double> p_l(12, 0.0), q_w(12, 0.4);
  BernoulliFamily fam(p_l, 2.0);
  TailCheckResult r = mc_tail_check(fam, q_w, 2.0, 200000, 23);
  CHECK(r.mu == doctest::Approx(4.8));
  // exact Binomial(12, 0.4) CDF at 2
  double cdf = 0;
  for (int k = 0; k <= 2; ++k) {
    double c = std::exp(std::lgamma(13.0) - std::lgamma(k + 1.0) - std::lgamma(13.0 - k));
    cdf += c * std::pow(0.4, k) * std::pow(0.6, 12 - k);
  }
  CHECK(r.empirical == doctest::Approx(cdf).epsilon(0.05));
  CHECK(r.empirical <= r.bound);
}

TEST_CASE("mixed family with a populated B side stays below the bound") {
  std::vector<double> p_l{0.9, 0.9, 0.9, 0.9, 0.1, 0.1, 0.1, 0.1};
  std::vector<double> q_w{0.8, 0.8, 0.8, 0.8, 0.6, 0.6, 0.6, 0.6};
  BernoulliFamily fam(p_l, 4.0);
  CHECK(fam.size_b() == 4);
  for (double xi : {0.0, 1.0}) {
    TailCheckResult r = mc_tail_check(fam, q_w, xi, 300000, 29);
    CHECK_MESSAGE(r.empirical <= r.bound, "xi=", xi, " emp=", r.empirical, " bound=", r.bound);
  }
  // xi = mu: the bound is at least one, trivially dominating
  TailCheckResult r = mc_tail_check(fam, q_w, 2.72, 1000, 31);
  CHECK(r.bound >= std::exp(0.0) - 1e-12);
}

TEST_CASE("mu pipeline: L = 0 leaves only the mean-value term") {
  Region r(12.0);
  Site z{0, r.absorb_height(0)};
  MuReport m = mu_pipeline(12.0, 0.0, z);
  CHECK(m.volume_term == doctest::Approx(0.0));
  CHECK(m.mu == doctest::Approx(m.mv_term).epsilon(1e-12));
}

TEST_CASE("mu pipeline scaling band at moderate n") {
  // mu(z) > 0 and mu/(L(n-L-|X_z|)) stays in a narrow band over the bulk
  double n = 40.0, l = 4.0;
  Region inner(n - l);
  double lo = 1e18, hi = 0;
  for (Site z : inner.boundary()) {
    if (std::abs(z.x) > n - l - 1) continue;
    if (std::abs(z.x) > 0.8 * (n - l)) continue;  // bulk boundary
    MuReport m = mu_pipeline(n, l, z);
    CHECK(m.mu > 0.0);
    lo = std::min(lo, m.normalized);
    hi = std::max(hi, m.normalized);
  }
  CHECK(lo > 0.0);
  CHECK(hi / lo < 4.0);
  CHECK_THROWS_AS(mu_pipeline(40.0, 4.0, Site{39, 0}), std::invalid_argument);
}

TEST_CASE("mu* pipeline on the enlarged region") {
  double n = 20.0, a0l = 2.0, al = 4.0;
  Region outer(n + al);
  Site z{0, outer.absorb_height(0)};
  MuReport m = mu_star_pipeline(n, a0l, al, z);
  CHECK(m.mu > 0.0);
  CHECK(std::isfinite(m.normalized));
  // the volume term dominates here as well
  CHECK(std::abs(m.mv_term) < m.volume_term);
  CHECK_THROWS_AS(mu_star_pipeline(20.0, 25.0, 4.0, z), std::invalid_argument);
}
