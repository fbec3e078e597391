#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace comb {

// Comb lattice: all vertical edges, horizontal edges only on the x-axis.
// Sites (x,y), (x',y') are neighbors iff x==x' and |y-y'|==1, or
// y==y'==0 and |x-x'|==1.
struct Site {
  int x = 0;
  int y = 0;
  friend bool operator==(Site a, Site b) { return a.x == b.x && a.y == b.y; }
  friend bool operator!=(Site a, Site b) { return !(a == b); }
  friend bool operator<(Site a, Site b) { return a.x != b.x ? a.x < b.x : a.y < b.y; }
};

inline std::uint64_t site_key(Site z) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(z.x)) << 32) |
         static_cast<std::uint32_t>(z.y);
}

struct SiteHash {
  std::size_t operator()(Site z) const {
    std::uint64_t k = site_key(z) * 0x9e3779b97f4a7c15ULL;
    return static_cast<std::size_t>(k ^ (k >> 29));
  }
};

inline int degree(Site z) { return z.y == 0 ? 4 : 2; }

// Fixed neighbor order: axis sites (x+1,0),(x-1,0),(x,1),(x,-1); tooth
// sites (x,y+1),(x,y-1). Walk code indexes into this order.
inline int neighbors(Site z, Site out[4]) {
  if (z.y == 0) {
    out[0] = {z.x + 1, 0};
    out[1] = {z.x - 1, 0};
    out[2] = {z.x, 1};
    out[3] = {z.x, -1};
    return 4;
  }
  out[0] = {z.x, z.y + 1};
  out[1] = {z.x, z.y - 1};
  return 2;
}

inline std::vector<Site> neighbor_list(Site z) {
  Site buf[4];
  int n = neighbors(z, buf);
  return std::vector<Site>(buf, buf + n);
}

// Unique neighbor strictly closer to the origin (the comb is a tree).
inline Site parent(Site z) {
  if (z.x == 0 && z.y == 0) throw std::invalid_argument("origin has no parent");
  if (z.y > 0) return {z.x, z.y - 1};
  if (z.y < 0) return {z.x, z.y + 1};
  return {z.x > 0 ? z.x - 1 : z.x + 1, 0};
}

// Domain D(rho) = {(x,y): |x| < rho, |y| < (rho-|x|)^2/3} intersected with
// the lattice (strict inequalities).
//
// rho is kept as a double, but when rho is (within 1e-9 of) a rational
// p/q with q <= 64 all membership tests are done in integer arithmetic:
//   y < (rho-|x|)^2/3   <=>   3*y*q^2 < (p - q|x|)^2.
// The CLI restricts rho to multiples of 1/4, so the exact branch is the
// one exercised everywhere it matters.
class Region {
 public:
  explicit Region(double rho) : rho_(rho) {
    if (!(rho > 0)) throw std::invalid_argument("Region: rho must be > 0");
    for (std::int64_t q = 1; q <= 64; ++q) {
      double scaled = rho * static_cast<double>(q);
      double rounded = std::nearbyint(scaled);
      if (std::abs(scaled - rounded) < 1e-9 && rounded >= 1) {
        num_ = static_cast<std::int64_t>(rounded);
        den_ = q;
        break;
      }
    }
    if (den_ > 0) {
      xmax_ = static_cast<int>((num_ + den_ - 1) / den_ - 1);  // largest integer < rho
    } else {
      xmax_ = static_cast<int>(std::ceil(rho)) - 1;
      if (static_cast<double>(xmax_ + 1) < rho) ++xmax_;  // guard against ceil of exact double
    }
    heights_.resize(xmax_ + 1);
    for (int x = 0; x <= xmax_; ++x) heights_[x] = compute_tooth_height(x);
  }

  double rho() const { return rho_; }
  int xmax() const { return xmax_; }
  bool rational() const { return den_ > 0; }

  // T(x): number of sites with y >= 1 in column x (0 if |x| > xmax)
  int tooth_height(int x) const {
    int ax = x < 0 ? -x : x;
    return ax > xmax_ ? 0 : heights_[ax];
  }

  // L(x) = T(x) + 1: smallest integer >= (rho-|x|)^2/3, the absorbing
  // height of column x
  int absorb_height(int x) const { return tooth_height(x) + 1; }

  bool contains(Site z) const {
    int ax = z.x < 0 ? -z.x : z.x;
    if (ax > xmax_) return false;
    int ay = z.y < 0 ? -z.y : z.y;
    return ay <= heights_[ax];
  }

  std::int64_t volume() const {
    std::int64_t v = 0;
    for (int x = -xmax_; x <= xmax_; ++x) v += 2 * tooth_height(x) + 1;
    return v;
  }

  // Comb-adjacency boundary: tooth tops (x, +-L(x)) and the two axis ends.
  // Order: x ascending, then y ascending (byte-reproducible snapshots).
  std::vector<Site> boundary() const {
    std::vector<Site> out;
    out.reserve(4 * static_cast<std::size_t>(xmax_) + 4);
    out.push_back({-xmax_ - 1, 0});
    for (int x = -xmax_; x <= xmax_; ++x) {
      int l = absorb_height(x);
      out.push_back({x, -l});
      out.push_back({x, l});
    }
    out.push_back({xmax_ + 1, 0});
    return out;
  }

 private:
  int compute_tooth_height(int ax) const {
    if (den_ > 0) {
      std::int64_t s = num_ - den_ * ax;  // q*(rho - |x|) > 0 for ax <= xmax
      std::int64_t s2 = s * s;
      std::int64_t d = 3 * den_ * den_;
      return static_cast<int>((s2 + d - 1) / d - 1);  // largest y with 3*y*q^2 < s^2
    }
    double q = (rho_ - ax) * (rho_ - ax) / 3.0;
    double r = std::nearbyint(q);
    if (std::abs(q - r) < 1e-9) return static_cast<int>(r) - 1;  // y < q strict
    return static_cast<int>(std::floor(q));
  }

  double rho_;
  std::int64_t num_ = 0, den_ = 0;
  int xmax_ = 0;
  std::vector<int> heights_;
};

inline std::int64_t domain_site_count(double n) { return Region(n).volume(); }

// R(z) < Rbar(z) are the radii with  z in dD(r)  <=>  R(z) < r <= Rbar(z):
// Rbar solves (Rbar-|x|)^2/3 = |y|, and R(z) = Rbar(parent(z)).
struct Radii {
  double inner = 0;  // R(z)
  double outer = 0;  // Rbar(z)
};

inline double radius_outer(Site z) {
  return std::abs(z.x) + std::sqrt(3.0 * std::abs(z.y));
}

inline Radii radii(Site z) {
  if (z.x == 0 && z.y == 0) throw std::invalid_argument("radii: origin excluded");
  return {radius_outer(parent(z)), radius_outer(z)};
}

}  // namespace comb
