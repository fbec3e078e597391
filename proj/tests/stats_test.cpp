#include <doctest.h>

#include <cmath>

#include "comb/rng.hpp"
#include "comb/stats.hpp"

using namespace comb;

TEST_CASE("incomplete gamma and chi-square p-values") {
  // Q(1/2, x/2) relates to erfc for dof = 1
  CHECK(chi2_pvalue(3.841458820694124, 1) == doctest::Approx(0.05).epsilon(1e-6));
  CHECK(chi2_pvalue(5.991464547107979, 2) == doctest::Approx(0.05).epsilon(1e-6));
  CHECK(chi2_pvalue(0.0, 5) == doctest::Approx(1.0));
  CHECK(gamma_q(2.0, 0.0) == 1.0);
}

TEST_CASE("goodness of fit pools small bins") {
  std::vector<std::int64_t> counts{250, 240, 260, 250, 0, 0};
  std::vector<double> probs{0.25, 0.25, 0.25, 0.25, 0.0, 0.0};
  Chi2Result r = chi2_goodness_of_fit(counts, probs);
  CHECK(r.bins == 4);
  CHECK(r.pvalue > 0.5);
}

TEST_CASE("uniform RNG passes its own chi-square") {
  Rng rng(123, 7);
  std::vector<std::int64_t> counts(16, 0);
  for (int i = 0; i < 160000; ++i) counts[rng.next_below(16)] += 1;
  Chi2Result r = chi2_goodness_of_fit(counts, std::vector<double>(16, 1.0 / 16.0));
  CHECK(r.pvalue > 0.001);
}

TEST_CASE("two-sample chi-square on identical generators") {
  Rng a(5, 0), b(5, 1);
  std::vector<std::int64_t> ca(8, 0), cb(8, 0);
  for (int i = 0; i < 80000; ++i) {
    ca[a.next_below(8)] += 1;
    cb[b.next_below(8)] += 1;
  }
  Chi2Result r = chi2_two_sample(ca, cb);
  CHECK(r.pvalue > 0.001);
}

TEST_CASE("KS against the true CDF") {
  Rng rng(9, 0);
  std::vector<double> u;
  for (int i = 0; i < 50000; ++i) u.push_back(rng.next_double());
  CHECK(ks_pvalue(u, [](double x) { return std::clamp(x, 0.0, 1.0); }) > 0.001);
  // cubed variables against x^(1/3) CDF must fail decisively
  std::vector<double> v;
  for (double x : u) v.push_back(x * x * x);
  CHECK(ks_pvalue(v, [](double x) { return std::clamp(x, 0.0, 1.0); }) < 1e-6);
}

TEST_CASE("wilson interval brackets the proportion") {
  Interval iv = wilson_interval(50, 100);
  CHECK(iv.lo < 0.5);
  CHECK(iv.hi > 0.5);
  Interval zero = wilson_interval(0, 10000);
  CHECK(zero.lo == 0.0);
  CHECK(zero.hi < 0.001);
}

TEST_CASE("quantiles and correlation") {
  std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  CHECK(quantile(v, 0.5) == doctest::Approx(5.5));
  CHECK(quantile(v, 0.0) == doctest::Approx(1.0));
  CHECK(quantile(v, 1.0) == doctest::Approx(10.0));
  std::vector<double> x{1, 2, 3, 4}, y{2, 4, 6, 8}, w{4, 3, 2, 1};
  CHECK(pearson_correlation(x, y) == doctest::Approx(1.0));
  CHECK(pearson_correlation(x, w) == doctest::Approx(-1.0));
}

TEST_CASE("rng streams are reproducible and distinct") {
  Rng a(42, 3), b(42, 3), c(42, 4);
  bool all_same = true, any_same = false;
  for (int i = 0; i < 100; ++i) {
    auto va = a.next_u64(), vb = b.next_u64(), vc = c.next_u64();
    if (va != vb) all_same = false;
    if (va == vc) any_same = true;
  }
  CHECK(all_same);
  CHECK(!any_same);
}
