#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "comb/harmonic.hpp"
#include "comb/lattice.hpp"
#include "comb/rng.hpp"
#include "comb/stats.hpp"
#include "comb/walk.hpp"

using namespace comb;

TEST_CASE("single step law") {
  Rng rng(1, 0);
  std::map<std::pair<int, int>, std::int64_t> counts;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    Site z = step_site({0, 0}, rng);
    counts[{z.x, z.y}] += 1;
  }
  REQUIRE(counts.size() == 4);
  std::vector<std::int64_t> c;
  for (auto& [k, v] : counts) c.push_back(v);
  Chi2Result r = chi2_goodness_of_fit(c, {0.25, 0.25, 0.25, 0.25});
  CHECK(r.pvalue > 0.001);

  std::map<int, std::int64_t> tooth;
  for (int i = 0; i < n; ++i) tooth[step_site({2, 3}, rng).y] += 1;
  REQUIRE(tooth.size() == 2);
  CHECK(tooth.count(2) == 1);
  CHECK(tooth.count(4) == 1);
  Chi2Result r2 = chi2_goodness_of_fit({tooth[2], tooth[4]}, {0.5, 0.5});
  CHECK(r2.pvalue > 0.001);
}

TEST_CASE("same seed gives the same trajectory") {
  Rng a(99, 5), b(99, 5);
  WalkState sa, sb;
  for (int i = 0; i < 1000; ++i) {
    step(sa, a);
    step(sb, b);
    REQUIRE(sa.pos == sb.pos);
  }
  Rng c(99, 6);
  WalkState sc;
  bool same = true;
  for (int i = 0; i < 1000; ++i) {
    step(sc, c);
    if (!(sc.pos == sa.pos)) same = false;
  }
  CHECK(!same);
}

TEST_CASE("tooth excursion law") {
  Rng rng(3, 0);
  CHECK_THROWS_AS(tooth_excursion(0, rng), std::invalid_argument);
  for (int i = 0; i < 100; ++i) {
    ExcursionOutcome o = tooth_excursion(1, rng);
    CHECK(o.absorbed);
    CHECK(o.height == 1);
  }
  for (int h : {2, 5, 17}) {
    const int n = 1000000;
    std::int64_t hits = 0;
    for (int i = 0; i < n; ++i)
      if (tooth_excursion(h, rng).absorbed) ++hits;
    double p = 1.0 / h;
    double sigma = std::sqrt(p * (1 - p) / n);
    CHECK(std::abs(static_cast<double>(hits) / n - p) < 3 * sigma);
  }
}

namespace {

std::vector<std::int64_t> exit_histogram(const Region& r, WalkMode mode, int samples,
                                         std::uint64_t seed) {
  auto boundary = r.boundary();
  std::map<std::pair<int, int>, std::size_t> index;
  for (std::size_t i = 0; i < boundary.size(); ++i) index[{boundary[i].x, boundary[i].y}] = i;
  std::vector<std::int64_t> counts(boundary.size(), 0);
  for (int i = 0; i < samples; ++i) {
    Rng rng(seed, static_cast<std::uint64_t>(i));
    Site e = run_until_exit({0, 0}, r, mode, rng).exit_site;
    auto it = index.find({e.x, e.y});
    REQUIRE(it != index.end());
    counts[it->second] += 1;
  }
  return counts;
}

}  // namespace

TEST_CASE("shortcut exit law matches the exact solver") {
  Region r(3.0);
  auto counts = exit_histogram(r, WalkMode::shortcut, 200000, 77);
  ExitDistribution d = exit_distribution(r, {0, 0});
  Chi2Result c = chi2_goodness_of_fit(counts, d.probs);
  CHECK_MESSAGE(c.pvalue > 0.001, "stat=", c.stat, " dof=", c.dof);
}

TEST_CASE("naive and shortcut exit laws agree") {
  for (double rho : {2.0, 3.0, 4.5}) {
    Region r(rho);
    auto a = exit_histogram(r, WalkMode::naive, 60000, 101);
    auto b = exit_histogram(r, WalkMode::shortcut, 60000, 202);
    Chi2Result c = chi2_two_sample(a, b);
    CHECK_MESSAGE(c.pvalue > 0.001, "rho=", rho, " stat=", c.stat, " dof=", c.dof);
  }
}

TEST_CASE("run_until_exit rejects starts outside the region") {
  Region r(3.0);
  Rng rng(0, 0);
  CHECK_THROWS_AS(run_until_exit({5, 0}, r, WalkMode::naive, rng), std::invalid_argument);
}

TEST_CASE("hit_before_exit basics and one-step law") {
  Region r(3.0);
  Rng rng(5, 0);
  CHECK(hit_before_exit({2, 0}, {2, 0}, r, rng));
  const int n = 200000;
  std::int64_t hits = 0;
  for (int i = 0; i < n; ++i) {
    Rng s(13, static_cast<std::uint64_t>(i));
    if (hit_before_exit({0, 0}, {1, 0}, r, s)) ++hits;
  }
  double exact = 33.0 / 76.0;
  double sigma = std::sqrt(exact * (1 - exact) / n);
  CHECK(std::abs(static_cast<double>(hits) / n - exact) < 4 * sigma);
}

TEST_CASE("hit_before_exit with a tooth target matches the Green ratio") {
  Region r(4.0);
  BruteGreen brute(r);
  for (Site target : {Site{0, 2}, Site{1, 1}, Site{-1, 2}}) {
    auto col = brute.column(target);
    double exact = col[brute.index_of({0, 0})] / col[brute.index_of(target)];
    const int n = 150000;
    std::int64_t hits = 0;
    for (int i = 0; i < n; ++i) {
      Rng s(21, static_cast<std::uint64_t>(i));
      if (hit_before_exit({0, 0}, target, r, s)) ++hits;
    }
    double sigma = std::sqrt(exact * (1 - exact) / n);
    CHECK_MESSAGE(std::abs(static_cast<double>(hits) / n - exact) < 4 * sigma,
                  "target=(", target.x, ",", target.y, ") exact=", exact,
                  " got=", static_cast<double>(hits) / n);
  }
}

TEST_CASE("shortcut never reports an absorbed height above L(x)") {
  Region r(5.5);
  for (int i = 0; i < 20000; ++i) {
    Rng rng(31, static_cast<std::uint64_t>(i));
    Site e = run_until_exit({0, 0}, r, WalkMode::shortcut, rng).exit_site;
    if (e.y != 0) CHECK(std::abs(e.y) == r.absorb_height(e.x));
    else CHECK(std::abs(e.x) == r.xmax() + 1);
  }
}

TEST_CASE("axis-hitting lower bound with a fitted constant") {
  // kappa_a ((rho-x)/rho)^2 <= P_0(H(x,0) < E) for one kappa_a across x
  Region r(20.0);
  double kappa = 1e9;
  for (int x : {0, 5, 10, 15}) {
    double u = hitting_prob_axis(r, x);
    double shape = std::pow((20.0 - x) / 20.0, 2);
    kappa = std::min(kappa, u / shape);
  }
  CHECK(kappa > 0.0);
  const int n = 40000;
  for (int x : {5, 10, 15}) {
    std::int64_t hits = 0;
    for (int i = 0; i < n; ++i) {
      Rng s(47 + static_cast<std::uint64_t>(x), static_cast<std::uint64_t>(i));
      if (hit_before_exit({0, 0}, {x, 0}, r, s)) ++hits;
    }
    double emp = static_cast<double>(hits) / n;
    double exact = hitting_prob_axis(r, x);
    double sigma = std::sqrt(exact * (1 - exact) / n);
    CHECK(std::abs(emp - exact) < 4 * sigma);
    CHECK(emp + 4 * sigma >= kappa * std::pow((20.0 - x) / 20.0, 2));
  }
}

TEST_CASE("mode equivalence also holds from tooth and off-center starts") {
  Region r(3.0);
  for (Site start : {Site{1, 1}, Site{0, -2}, Site{-2, 0}}) {
    auto boundary = r.boundary();
    std::map<std::pair<int, int>, std::size_t> index;
    for (std::size_t i = 0; i < boundary.size(); ++i) index[{boundary[i].x, boundary[i].y}] = i;
    std::vector<std::int64_t> a(boundary.size(), 0), b(boundary.size(), 0);
    for (int i = 0; i < 40000; ++i) {
      Rng r2(600 + start.x, static_cast<std::uint64_t>(i));
      Site en = run_until_exit(start, r, WalkMode::naive, r2).exit_site;
      Rng r3(700 + start.x, static_cast<std::uint64_t>(i));
      Site es = run_until_exit(start, r, WalkMode::shortcut, r3).exit_site;
      a[index.at({en.x, en.y})] += 1;
      b[index.at({es.x, es.y})] += 1;
    }
    Chi2Result c = chi2_two_sample(a, b);
    CHECK_MESSAGE(c.pvalue > 0.001, "start=(", start.x, ",", start.y, ")");
  }
}

TEST_CASE("recorder with stacked targets on one arm is pathwise consistent") {
  Region r(4.0);
  BruteGreen brute(r);
  Site low{0, 1}, high{0, 2};
  auto col_low = brute.column(low);
  auto col_high = brute.column(high);
  double exact_low = col_low[brute.index_of({0, 0})] / col_low[brute.index_of(low)];
  double exact_high = col_high[brute.index_of({0, 0})] / col_high[brute.index_of(high)];
  const int n = 120000;
  std::int64_t hits_low = 0, hits_high = 0;
  for (int i = 0; i < n; ++i) {
    Rng rng(808, static_cast<std::uint64_t>(i));
    HitsRecorder rec({low, high});
    run_until_exit({0, 0}, r, WalkMode::shortcut, rng, &rec);
    if (rec.hit[0]) ++hits_low;
    if (rec.hit[1]) ++hits_high;
    // reaching the higher site forces a passage through the lower one
    CHECK(!(rec.hit[1] && !rec.hit[0]));
  }
  double sl = std::sqrt(exact_low * (1 - exact_low) / n);
  double sh = std::sqrt(exact_high * (1 - exact_high) / n);
  CHECK(std::abs(static_cast<double>(hits_low) / n - exact_low) < 4 * sl);
  CHECK(std::abs(static_cast<double>(hits_high) / n - exact_high) < 4 * sh);
}
