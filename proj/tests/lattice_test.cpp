#include <doctest.h>

#include <cmath>
#include <set>

#include "comb/lattice.hpp"
#include "comb/rng.hpp"

using namespace comb;

namespace {

// independent brute-force enumeration of D(rho) over a bounding box,
// evaluated in integer arithmetic for rho = p/q
std::vector<Site> enumerate_domain(std::int64_t p, std::int64_t q) {
  std::vector<Site> out;
  int box_x = static_cast<int>(p / q) + 2;
  for (int x = -box_x; x <= box_x; ++x) {
    std::int64_t s = p - q * std::abs(static_cast<std::int64_t>(x));
    if (s <= 0) continue;
    int box_y = static_cast<int>(s * s / (3 * q * q)) + 2;
    for (int y = -box_y; y <= box_y; ++y)
      if (3 * static_cast<std::int64_t>(std::abs(y)) * q * q < s * s) out.push_back({x, y});
  }
  return out;
}

}  // namespace

TEST_CASE("comb neighbors and degree") {
  CHECK(degree({0, 0}) == 4);
  auto n0 = neighbor_list({0, 0});
  CHECK(n0.size() == 4);
  std::set<std::pair<int, int>> got;
  for (Site z : n0) got.insert({z.x, z.y});
  CHECK(got == std::set<std::pair<int, int>>{{1, 0}, {-1, 0}, {0, 1}, {0, -1}});

  auto n1 = neighbor_list({3, 2});
  CHECK(degree({3, 2}) == 2);
  REQUIRE(n1.size() == 2);
  CHECK(n1[0] == Site{3, 3});
  CHECK(n1[1] == Site{3, 1});

  CHECK(degree({-5, 0}) == 4);
}

TEST_CASE("parent map") {
  CHECK(parent({2, 5}) == Site{2, 4});
  CHECK(parent({-3, 0}) == Site{-2, 0});
  CHECK(parent({0, -1}) == Site{0, 0});
  CHECK_THROWS_AS(parent({0, 0}), std::invalid_argument);
}

TEST_CASE("region membership follows the strict inequalities") {
  Region r(3.0);
  CHECK(r.contains({0, 2}));
  CHECK(!r.contains({2, 1}));  // 1 >= (3-2)^2/3
  CHECK(!r.contains({3, 0}));
  CHECK(r.contains({2, 0}));
  CHECK(r.contains({0, -2}));
  CHECK(!r.contains({0, 3}));
}

TEST_CASE("volumes match brute-force enumeration") {
  CHECK(Region(1.0).volume() == 1);
  CHECK(Region(2.0).volume() == 5);
  CHECK(Region(3.0).volume() == 13);
  // grid of rho = p/4 against the enumeration oracle
  for (std::int64_t p : {4, 5, 7, 10, 13, 22, 30, 41, 60}) {
    Region r(static_cast<double>(p) / 4.0);
    auto sites = enumerate_domain(p, 4);
    CHECK_MESSAGE(r.volume() == static_cast<std::int64_t>(sites.size()), "rho = ", p / 4.0);
    for (Site z : sites) CHECK(r.contains(z));
  }
}

TEST_CASE("membership symmetry in x and y") {
  Region r(5.25);
  Rng rng(7, 0);
  for (int i = 0; i < 500; ++i) {
    int x = static_cast<int>(rng.next_below(13)) - 6;
    int y = static_cast<int>(rng.next_below(21)) - 10;
    bool b = r.contains({x, y});
    CHECK(r.contains({-x, y}) == b);
    CHECK(r.contains({x, -y}) == b);
  }
}

TEST_CASE("absorbing height equals tooth height plus one, including exact multiples of 3") {
  // (rho - |x|)^2/3 integral at rho=3, x=0 (value 3) and rho=6, x=0 (value 12)
  for (double rho : {3.0, 6.0, 4.5, 5.5, 7.25, 9.75}) {
    Region r(rho);
    for (int x = -r.xmax(); x <= r.xmax(); ++x) {
      double q = (rho - std::abs(x)) * (rho - std::abs(x)) / 3.0;
      int smallest_geq = static_cast<int>(std::ceil(q - 1e-12));
      if (std::abs(q - std::nearbyint(q)) < 1e-9) smallest_geq = static_cast<int>(std::nearbyint(q));
      CHECK(r.absorb_height(x) == smallest_geq);
      CHECK(r.absorb_height(x) == r.tooth_height(x) + 1);
      CHECK(r.contains({x, r.tooth_height(x)}));
      CHECK(!r.contains({x, r.absorb_height(x)}));
    }
  }
}

TEST_CASE("volume is monotone and d(n)/n^3 approaches 4/9") {
  std::int64_t prev = 0;
  for (int n = 10; n <= 200; n += 10) {
    std::int64_t v = Region(static_cast<double>(n)).volume();
    CHECK(v >= prev);
    prev = v;
  }
  double ratio = static_cast<double>(Region(200.0).volume()) / (200.0 * 200.0 * 200.0);
  CHECK(ratio == doctest::Approx(4.0 / 9.0).epsilon(0.05));
}

TEST_CASE("boundary sites are outside, adjacent, and their parents are inside") {
  for (double rho : {1.0, 2.5, 3.0, 5.5, 8.0}) {
    Region r(rho);
    auto b = r.boundary();
    CHECK(static_cast<int>(b.size()) == 4 * r.xmax() + 4);
    for (Site z : b) {
      CHECK(!r.contains(z));
      CHECK(r.contains(parent(z)));
    }
    // boundary covers every exit: each inner site adjacent to the outside
    // must have all its outside neighbors in the list
    std::set<std::pair<int, int>> bset;
    for (Site z : b) bset.insert({z.x, z.y});
    for (int x = -r.xmax(); x <= r.xmax(); ++x) {
      for (int y = -r.tooth_height(x); y <= r.tooth_height(x); ++y) {
        for (Site nb : neighbor_list({x, y}))
          if (!r.contains(nb)) CHECK(bset.count({nb.x, nb.y}) == 1);
      }
    }
  }
}

TEST_CASE("parent-closedness of the region") {
  for (double rho : {2.0, 3.75, 6.5}) {
    Region r(rho);
    for (int x = -r.xmax(); x <= r.xmax(); ++x)
      for (int y = -r.tooth_height(x); y <= r.tooth_height(x); ++y)
        if (!(x == 0 && y == 0)) CHECK(r.contains(parent({x, y})));
  }
}

TEST_CASE("radii R(z) and Rbar(z)") {
  Radii r03 = radii({0, 3});
  CHECK(r03.outer == doctest::Approx(3.0));
  CHECK(r03.inner == doctest::Approx(std::sqrt(6.0)));
  Radii r40 = radii({4, 0});
  CHECK(r40.outer == doctest::Approx(4.0));
  CHECK(r40.inner == doctest::Approx(3.0));

  // boundary-membership consistency: z in dD(r) iff R(z) < r <= Rbar(z)
  Rng rng(11, 0);
  int checked = 0;
  for (int i = 0; i < 1000; ++i) {
    int x = static_cast<int>(rng.next_below(15)) - 7;
    int y = static_cast<int>(rng.next_below(31)) - 15;
    if (x == 0 && y == 0) continue;
    Site z{x, y};
    Radii rr = radii(z);
    for (double r : {1.0, 2.0, 3.25, 4.5, 6.0, 7.75}) {
      Region reg(r);
      bool in_boundary = false;
      for (Site b : reg.boundary())
        if (b == z) in_boundary = true;
      bool predicted = rr.inner < r && r <= rr.outer + 1e-12;
      CHECK_MESSAGE(in_boundary == predicted, "z=(", x, ",", y, ") r=", r);
      ++checked;
    }
  }
  CHECK(checked > 3000);
}
