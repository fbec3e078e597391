#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "comb/lattice.hpp"
#include "comb/rational.hpp"

namespace comb {

// ---------------------------------------------------------------------------
// Restricted Green's functions on D(rho).
//
// The central object is the field F(z) = G_D(z; 0), the expected number of
// visits to the origin before exiting D, started from z.  As a function of z
// it is discrete harmonic away from 0 (sum over neighbors equals deg(z)*F(z)),
// vanishes outside D, is affine on every tooth, and carries the source
// deg(0) = 4 at the origin.  By reversibility F(z) = (4/deg z) * G_D(0; z),
// so F coincides with G_D(0; .) on the axis and all exit probabilities from
// the origin read  P_0(exit at z) = F(parent(z)) / 4.
//
// Substituting the tooth closure F(x,+-1) = F(x,0)(1 - 1/L(x)) into the axis
// equations reduces everything to a tridiagonal system in the axis values,
// solved with the Thomas algorithm plus one iterative-refinement pass.
// ---------------------------------------------------------------------------

// Harmonic function on D(rho): axis values plus affine tooth closure.
// Tooth value at (x, y):  axis[x] + (top - axis[x]) * |y| / L(x),
// where `top` is the prescribed value at the absorbing site (x, +-L(x)).
// A field with a point source on a tooth stores the kink explicitly.
struct HarmonicField {
  Region region;
  std::vector<double> axis;      // value at (x,0), index x + xmax
  std::vector<double> top_up;    // boundary value at (x, +L(x))
  std::vector<double> top_down;  // boundary value at (x, -L(x))
  double end_pos = 0;            // boundary value at (+(xmax+1), 0)
  double end_neg = 0;            // boundary value at (-(xmax+1), 0)
  bool has_kink = false;
  Site kink_site{0, 0};
  double kink_value = 0;

  explicit HarmonicField(Region r)
      : region(r),
        axis(2 * r.xmax() + 1, 0.0),
        top_up(2 * r.xmax() + 1, 0.0),
        top_down(2 * r.xmax() + 1, 0.0) {}

  int idx(int x) const { return x + region.xmax(); }

  double axis_value(int x) const { return axis[static_cast<std::size_t>(idx(x))]; }

  // value at any site of D(rho) or its boundary
  double value(Site z) const {
    int xm = region.xmax();
    if (z.y == 0) {
      if (z.x == xm + 1) return end_pos;
      if (z.x == -xm - 1) return end_neg;
      if (z.x > xm || z.x < -xm) throw std::out_of_range("HarmonicField::value: site outside domain");
      return axis[static_cast<std::size_t>(idx(z.x))];
    }
    if (z.x > xm || z.x < -xm) throw std::out_of_range("HarmonicField::value: site outside domain");
    int l = region.absorb_height(z.x);
    int ay = z.y < 0 ? -z.y : z.y;
    if (ay > l) throw std::out_of_range("HarmonicField::value: site outside domain");
    return tooth_value(z.x, z.y);
  }

  // affine tooth formula, valid for any y (used by the harmonic extension)
  double tooth_value(int x, int y) const {
    double base = axis[static_cast<std::size_t>(idx(x))];
    double top = y > 0 ? top_up[static_cast<std::size_t>(idx(x))]
                       : top_down[static_cast<std::size_t>(idx(x))];
    int l = region.absorb_height(x);
    int ay = y < 0 ? -y : y;
    if (has_kink && x == kink_site.x && (y > 0) == (kink_site.y > 0) && y != 0) {
      int ys = kink_site.y < 0 ? -kink_site.y : kink_site.y;
      if (ay <= ys) return base + (kink_value - base) * static_cast<double>(ay) / ys;
      return kink_value + (top - kink_value) * static_cast<double>(ay - ys) / (l - ys);
    }
    return base + (top - base) * static_cast<double>(ay) / l;
  }
};

// Harmonic extension beyond D(rho): teeth continue with their slope, the
// axis and the teeth rooted outside follow (l-1)(k-1)*axis(+-xmax) which is
// harmonic at every site of the comb.  Used for the sandpile mean-value
// identity, where the test function must be harmonic on the whole cluster.
inline double extended_value(const HarmonicField& f, Site z) {
  int xm = f.region.xmax();
  int ax = z.x < 0 ? -z.x : z.x;
  if (ax <= xm) return z.y == 0 ? f.axis_value(z.x) : f.tooth_value(z.x, z.y);
  int k = ax - xm;
  double h = f.axis_value(z.x > 0 ? xm : -xm);
  return static_cast<double>(z.y - 1) * (k - 1) * h;
}

namespace detail {

// Thomas solve of the axis system
//   (2 + 2/L(x)) u(x) - u(x-1) - u(x+1) = rhs(x),   u outside := 0,
// over x in [lo, hi]; one residual-correction pass keeps the full-system
// residual at the 1e-15 level.
inline std::vector<double> solve_axis_segment(const Region& r, int lo, int hi,
                                              const std::vector<double>& rhs) {
  int n = hi - lo + 1;
  std::vector<double> diag(n), c(n), d(n), u(n);
  auto pass = [&](const std::vector<double>& b, std::vector<double>& out) {
    for (int i = 0; i < n; ++i) {
      diag[i] = 2.0 + 2.0 / r.absorb_height(lo + i);
      d[i] = b[i];
    }
    c[0] = -1.0 / diag[0];
    d[0] = d[0] / diag[0];
    for (int i = 1; i < n; ++i) {
      double m = diag[i] + c[i - 1];
      c[i] = -1.0 / m;
      d[i] = (d[i] + d[i - 1]) / m;
    }
    out[n - 1] = d[n - 1];
    for (int i = n - 2; i >= 0; --i) out[i] = d[i] - c[i] * out[i + 1];
  };
  pass(rhs, u);
  // residual correction
  std::vector<double> res(n), corr(n);
  for (int i = 0; i < n; ++i) {
    double dg = 2.0 + 2.0 / r.absorb_height(lo + i);
    double s = dg * u[i];
    if (i > 0) s -= u[i - 1];
    if (i + 1 < n) s -= u[i + 1];
    res[i] = rhs[i] - s;
  }
  pass(res, corr);
  for (int i = 0; i < n; ++i) u[i] += corr[i];
  return u;
}

inline std::vector<double> solve_axis(const Region& r, const std::vector<double>& rhs) {
  return solve_axis_segment(r, -r.xmax(), r.xmax(), rhs);
}

}  // namespace detail

// Closed two-sided envelopes for the origin Green field.  h vanishes on the curve
// |y| = (rho-|x|)^2/3 and h+ lives on the enlarged domain with [rho]+1.
inline double closed_h(Site z, double rho) {
  double s = rho - std::abs(static_cast<double>(z.x));
  return 2.0 * s / (rho * rho + 1.0 / 3.0) * (s * s / 3.0 - std::abs(static_cast<double>(z.y)));
}

inline double closed_h_plus(Site z, double rho) {
  double m = std::floor(rho) + 1.0;
  double s = m - std::abs(static_cast<double>(z.x));
  return 2.0 * s / (m * m + 1.0 / 3.0 + 1.0) * (s * s / 3.0 + 1.0 - std::abs(static_cast<double>(z.y)));
}

// F(z) = G_D(z;0): source 4 at the origin, zero boundary data.
inline HarmonicField green_origin_field(const Region& r) {
  HarmonicField f(r);
  std::vector<double> rhs(2 * r.xmax() + 1, 0.0);
  rhs[static_cast<std::size_t>(r.xmax())] = 4.0;
  f.axis = detail::solve_axis(r, rhs);
  return f;
}

// Exact-rational axis values of green_origin_field (validation mode,
// |D(rho)| <= 2000, rho rational).  Uses the even symmetry F(x) = F(-x).
inline std::vector<BigRat> green_origin_axis_exact(const Region& r) {
  if (!r.rational()) throw std::invalid_argument("exact mode needs rational rho");
  if (r.volume() > 2000) throw std::invalid_argument("exact mode capped at |D| <= 2000");
  int n = r.xmax() + 1;  // unknowns x = 0..xmax, F(-x) = F(x)
  std::vector<BigRat> diag(n), rhs(n), u(n);
  for (int x = 0; x < n; ++x) {
    diag[x] = BigRat(2) + BigRat::fraction(2, r.absorb_height(x));
    rhs[x] = BigRat(0);
  }
  rhs[0] = BigRat(4);
  // row 0 couples to x=1 with weight 2 (both half-axes fold onto x >= 0)
  std::vector<BigRat> upper(n, BigRat(-1));
  upper[0] = BigRat(-2);
  for (int x = 1; x < n; ++x) {
    // subtract (-1/diag[x-1]) * row_{x-1} from row_x
    diag[x] = diag[x] - (BigRat(-1) / diag[x - 1]) * upper[x - 1];
    rhs[x] = rhs[x] + rhs[x - 1] / diag[x - 1];
  }
  u[n - 1] = rhs[n - 1] / diag[n - 1];
  for (int x = n - 2; x >= 0; --x) u[x] = (rhs[x] - upper[x] * u[x + 1]) / diag[x];
  return u;
}

// F_s(w) = G_D(w;s): source deg(s) at s.  A source on a tooth reduces to the
// same axis tridiagonal with right-hand side 2(L-ys)/L at its column, plus a
// stored kink value  F(s) = a(L-ys)/L + 2 ys (L-ys)/L.
inline HarmonicField green_source_field(const Region& r, Site s) {
  if (!r.contains(s)) throw std::invalid_argument("green_source_field: source outside region");
  HarmonicField f(r);
  std::vector<double> rhs(2 * r.xmax() + 1, 0.0);
  if (s.y == 0) {
    rhs[static_cast<std::size_t>(f.idx(s.x))] = 4.0;
    f.axis = detail::solve_axis(r, rhs);
    return f;
  }
  int l = r.absorb_height(s.x);
  int ys = s.y < 0 ? -s.y : s.y;
  rhs[static_cast<std::size_t>(f.idx(s.x))] = 2.0 * (l - ys) / l;
  f.axis = detail::solve_axis(r, rhs);
  double a = f.axis_value(s.x);
  f.has_kink = true;
  f.kink_site = s;
  f.kink_value = a * static_cast<double>(l - ys) / l + 2.0 * ys * (l - ys) / static_cast<double>(l);
  return f;
}

// h_z(w) = P_w(exit D at z) for a boundary site z: harmonic with boundary
// indicator data.  Tooth-top z contributes 1/L at its column; an axis end
// contributes 1 at the adjacent axis site.
inline HarmonicField boundary_field(const Region& r, Site z) {
  HarmonicField f(r);
  int xm = r.xmax();
  std::vector<double> rhs(2 * xm + 1, 0.0);
  if (z.y == 0) {
    if (z.x != xm + 1 && z.x != -xm - 1)
      throw std::invalid_argument("boundary_field: not a boundary site");
    if (z.x > 0) {
      f.end_pos = 1.0;
      rhs[static_cast<std::size_t>(f.idx(xm))] = 1.0;
    } else {
      f.end_neg = 1.0;
      rhs[static_cast<std::size_t>(f.idx(-xm))] = 1.0;
    }
  } else {
    int l = r.absorb_height(z.x);
    int ay = z.y < 0 ? -z.y : z.y;
    if (std::abs(z.x) > xm || ay != l)
      throw std::invalid_argument("boundary_field: not a boundary site");
    rhs[static_cast<std::size_t>(f.idx(z.x))] = 1.0 / l;
    (z.y > 0 ? f.top_up : f.top_down)[static_cast<std::size_t>(f.idx(z.x))] = 1.0;
  }
  f.axis = detail::solve_axis(r, rhs);
  return f;
}

// Exit-site distribution, P_start(S(E(rho)) = z) over the boundary.
// Last-passage decomposition: P = G(start; parent(z))/deg(parent(z)),
// which in field form is F_start(parent(z)) / deg(start).
struct ExitDistribution {
  Region region;
  Site start;
  std::vector<Site> sites;    // region.boundary() order
  std::vector<double> probs;

  double prob(Site z) const {
    for (std::size_t i = 0; i < sites.size(); ++i)
      if (sites[i] == z) return probs[i];
    throw std::out_of_range("ExitDistribution::prob: not a boundary site");
  }
  double total() const {
    double s = 0;
    for (double p : probs) s += p;
    return s;
  }
};

inline ExitDistribution exit_distribution(const Region& r, Site start) {
  if (!r.contains(start)) throw std::invalid_argument("exit_distribution: start outside region");
  HarmonicField f = green_source_field(r, start);
  ExitDistribution d{r, start, r.boundary(), {}};
  d.probs.reserve(d.sites.size());
  double inv_deg = 1.0 / degree(start);
  for (Site z : d.sites) d.probs.push_back(f.value(parent(z)) * inv_deg);
  return d;
}

// u(0) = P_0(H((x,0)) < E(rho)) by the axis recurrence
//   u(k)(2 + 2/L(k)) = u(k+1) + u(k-1),  u(x) = 1, u = 0 outside.
inline double hitting_prob_axis(const Region& r, int x) {
  if (x == 0) return 1.0;
  if (x < 0 || static_cast<double>(x) >= r.rho() - 1.0)
    throw std::invalid_argument("hitting_prob_axis: x out of range [0, rho-1)");
  // left segment [-xmax, x-1], boundary value 1 at (x,0)
  int lo = -r.xmax(), hi = x - 1;
  std::vector<double> rhs(static_cast<std::size_t>(hi - lo + 1), 0.0);
  rhs.back() = 1.0;
  std::vector<double> u = detail::solve_axis_segment(r, lo, hi, rhs);
  return u[static_cast<std::size_t>(-lo)];
}

// first-step decomposition: P_0(H((1,0)) < E(rho)) = (1 + 1/L(0) + 2/G(0;0))^{-1}
inline double one_step_hitting_formula(const Region& r) {
  double g00 = green_origin_field(r).axis_value(0);
  return 1.0 / (1.0 + 1.0 / r.absorb_height(0) + 2.0 / g00);
}

// ---------------------------------------------------------------------------
// Case bounds on P_w(exit at z) by the position of w relative to z.
// kappa_a and kappa_iii are measured calibration inputs.  Three cases are upper
// bounds; the same-arm case is a lower bound.
// ---------------------------------------------------------------------------
enum class GreenBoundCase { between_columns, beyond_column, opposite_halfline, same_arm };

struct GreenBound {
  GreenBoundCase which;
  double bound;
  bool is_lower;
};

inline GreenBound exit_case_bound(Site w, Site z, const Region& r, double kappa_a,
                                   double kappa_iii) {
  // normalize by the symmetries of D(rho): make X_z >= 0, then Y_z >= 0
  if (z.x < 0) { z.x = -z.x; w.x = -w.x; }
  if (z.y < 0) { z.y = -z.y; w.y = -w.y; }
  double rho = r.rho();
  int lw = r.absorb_height(w.x);
  int ayw = w.y < 0 ? -w.y : w.y;
  double ruin = static_cast<double>(lw - ayw) / lw;  // P_w(reach own base before exit)
  if (w.x == z.x && ((w.y > 0) == (z.y > 0)) && w.y != 0 && z.y != 0) {
    return {GreenBoundCase::same_arm, 0.5 * ayw / lw, true};
  }
  if (w.x < 0) {
    double b = kappa_iii * ruin * std::pow(rho - std::abs(static_cast<double>(w.x)), 3) *
               (rho + 1.0 - z.x) / std::pow(rho, 5);
    return {GreenBoundCase::opposite_halfline, b, false};
  }
  if (w.x < z.x || (w.x == z.x && ((w.y > 0) != (z.y > 0) || w.y == 0))) {
    double b = 4.0 / kappa_a * ruin * (rho + 1.0 - z.x) / ((rho - w.x) * (rho - w.x));
    return {GreenBoundCase::between_columns, b, false};
  }
  int lz = r.absorb_height(z.x);
  double b = 4.0 / kappa_a * (static_cast<double>(lw - ayw) / lz) * (rho - w.x) /
             ((rho - z.x) * (rho - z.x));
  return {GreenBoundCase::beyond_column, b, false};
}

// ---------------------------------------------------------------------------
// Squared-sum of exit probabilities and mean-value functional,
// both in closed form per tooth: sums of an affine function and its square.
// ---------------------------------------------------------------------------

namespace detail {

inline double sum_affine(double a, double b, int t) {
  // sum_{y=1}^{t} (a + b y)
  return a * t + b * 0.5 * t * (t + 1.0);
}
inline double sum_affine_sq(double a, double b, int t) {
  // sum_{y=1}^{t} (a + b y)^2
  double s1 = 0.5 * t * (t + 1.0);
  double s2 = t * (t + 1.0) * (2.0 * t + 1.0) / 6.0;
  return a * a * t + 2.0 * a * b * s1 + b * b * s2;
}

}  // namespace detail

struct G2Result {
  double sum;
  double ratio;  // sum / (rho + 1 - |X_z|)^2
};

inline G2Result g2_sum(const Region& r, Site z) {
  HarmonicField h = boundary_field(r, z);
  double s = 0;
  for (int x = -r.xmax(); x <= r.xmax(); ++x) {
    double a = h.axis_value(x);
    int t = r.tooth_height(x);
    int l = t + 1;
    double bu = (h.top_up[static_cast<std::size_t>(h.idx(x))] - a) / l;
    double bd = (h.top_down[static_cast<std::size_t>(h.idx(x))] - a) / l;
    s += a * a + detail::sum_affine_sq(a, bu, t) + detail::sum_affine_sq(a, bd, t);
  }
  double span = r.rho() + 1.0 - std::abs(static_cast<double>(z.x));
  return {s, s / (span * span)};
}

// MV(f, Lambda) = sum_{z in Lambda} (f(z) - f(0)) for a subregion Lambda of
// the field's domain.
inline double mean_value(const HarmonicField& f, const Region& lambda) {
  if (lambda.xmax() > f.region.xmax())
    throw std::invalid_argument("mean_value: Lambda exceeds field domain");
  double s = 0;
  for (int x = -lambda.xmax(); x <= lambda.xmax(); ++x) {
    int t = lambda.tooth_height(x);
    if (t > f.region.tooth_height(x))
      throw std::invalid_argument("mean_value: Lambda exceeds field domain");
    double a = f.axis_value(x);
    if (f.has_kink && x == f.kink_site.x) {
      s += a;
      for (int y = 1; y <= t; ++y) s += f.tooth_value(x, y) + f.tooth_value(x, -y);
      continue;
    }
    int l = f.region.absorb_height(x);
    double bu = (f.top_up[static_cast<std::size_t>(f.idx(x))] - a) / l;
    double bd = (f.top_down[static_cast<std::size_t>(f.idx(x))] - a) / l;
    s += a + detail::sum_affine(a, bu, t) + detail::sum_affine(a, bd, t);
  }
  return s - static_cast<double>(lambda.volume()) * f.axis_value(0);
}

inline double mean_value(const HarmonicField& f) { return mean_value(f, f.region); }

// Max residual of the discrete-harmonic equations over the whole domain,
// relative to max|f|; `source` adds deg(source) at that site.
inline double harmonic_residual(const HarmonicField& f, const Site* source) {
  double max_res = 0, max_val = 0;
  Site nbr[4];
  for (int x = -f.region.xmax(); x <= f.region.xmax(); ++x) {
    int t = f.region.tooth_height(x);
    for (int y = -t; y <= t; ++y) {
      Site zc{x, y};
      double v = f.value(zc);
      max_val = std::max(max_val, std::abs(v));
      double s = 0;
      int dg = neighbors(zc, nbr);
      for (int i = 0; i < dg; ++i) s += f.value(nbr[i]);
      if (source && *source == zc) s += degree(zc);
      max_res = std::max(max_res, std::abs(s - dg * v));
    }
  }
  return max_val > 0 ? max_res / max_val : max_res;
}

// ---------------------------------------------------------------------------
// Independent oracle over the full site system (no tooth-linear reduction):
// solves  deg(x) g(x) - sum_{nbr} g = deg(w) 1_{x=w}, giving the column
// g = G(.; w).  Dense Gaussian elimination with partial pivoting for small
// domains, generic leaf-first sparse elimination (zero fill on a tree) above.
// ---------------------------------------------------------------------------
class BruteGreen {
 public:
  explicit BruteGreen(const Region& r, std::int64_t size_cap = 20000) : region_(r) {
    n_ = r.volume();
    if (n_ > size_cap) throw std::invalid_argument("BruteGreen: size cap exceeded");
    sites_.reserve(static_cast<std::size_t>(n_));
    for (int x = -r.xmax(); x <= r.xmax(); ++x) {
      int t = r.tooth_height(x);
      for (int y = -t; y <= t; ++y) sites_.push_back({x, y});
    }
    index_.reserve(sites_.size() * 2);
    for (std::size_t i = 0; i < sites_.size(); ++i) index_[site_key(sites_[i])] = i;
    factorize();
  }

  std::int64_t size() const { return n_; }
  const std::vector<Site>& sites() const { return sites_; }
  std::size_t index_of(Site z) const {
    auto it = index_.find(site_key(z));
    if (it == index_.end()) throw std::out_of_range("BruteGreen: site outside domain");
    return it->second;
  }

  // G(., w) over all sites
  std::vector<double> column(Site w) const {
    std::vector<double> b(sites_.size(), 0.0);
    b[index_of(w)] = degree(w);
    return solve(b);
  }

  double entry(Site x, Site w) const { return column(w)[index_of(x)]; }

  std::vector<double> solve(std::vector<double> b) const {
    // forward: fold eliminated leaves into their elimination parent
    for (std::size_t k = 0; k < order_.size(); ++k) {
      std::size_t v = order_[k];
      if (elim_parent_[v] != kNone) b[elim_parent_[v]] += b[v] / diag_[v];
    }
    // backward
    std::vector<double> g(b.size(), 0.0);
    for (std::size_t k = order_.size(); k-- > 0;) {
      std::size_t v = order_[k];
      double acc = b[v];
      if (elim_parent_[v] != kNone) acc += g[elim_parent_[v]];
      g[v] = acc / diag_[v];
    }
    return g;
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  void factorize() {
    std::size_t n = sites_.size();
    std::vector<std::vector<std::size_t>> adj(n);
    Site nbr[4];
    for (std::size_t i = 0; i < n; ++i) {
      int dg = neighbors(sites_[i], nbr);
      for (int j = 0; j < dg; ++j) {
        auto it = index_.find(site_key(nbr[j]));
        if (it != index_.end()) adj[i].push_back(it->second);
      }
    }
    diag_.resize(n);
    for (std::size_t i = 0; i < n; ++i) diag_[i] = degree(sites_[i]);
    elim_parent_.assign(n, kNone);
    order_.clear();
    order_.reserve(n);
    std::vector<std::size_t> remaining_deg(n);
    std::vector<char> done(n, 0);
    std::vector<std::size_t> queue;
    for (std::size_t i = 0; i < n; ++i) {
      remaining_deg[i] = adj[i].size();
      if (remaining_deg[i] <= 1) queue.push_back(i);
    }
    while (!queue.empty()) {
      std::size_t v = queue.back();
      queue.pop_back();
      if (done[v]) continue;
      done[v] = 1;
      order_.push_back(v);
      for (std::size_t u : adj[v]) {
        if (done[u]) continue;
        // v is a leaf in the remaining graph: u is its unique live neighbor
        elim_parent_[v] = u;
        diag_[u] -= 1.0 / diag_[v];
        if (--remaining_deg[u] <= 1) queue.push_back(u);
      }
    }
    if (order_.size() != n) throw std::logic_error("BruteGreen: elimination did not exhaust the graph");
  }

  Region region_;
  std::int64_t n_ = 0;
  std::vector<Site> sites_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
  std::vector<std::size_t> order_;
  std::vector<std::size_t> elim_parent_;
  std::vector<double> diag_;
};

// Plain dense Gaussian elimination over the full system; the slowest, most
// literal route.  Only sensible for small domains.
inline std::vector<std::vector<double>> dense_green_matrix(const Region& r,
                                                           std::int64_t size_cap = 1500) {
  std::int64_t n64 = r.volume();
  if (n64 > size_cap) throw std::invalid_argument("dense_green_matrix: size cap exceeded");
  std::size_t n = static_cast<std::size_t>(n64);
  std::vector<Site> sites;
  sites.reserve(n);
  for (int x = -r.xmax(); x <= r.xmax(); ++x) {
    int t = r.tooth_height(x);
    for (int y = -t; y <= t; ++y) sites.push_back({x, y});
  }
  std::unordered_map<std::uint64_t, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index[site_key(sites[i])] = i;
  // augmented [A | I*deg]: columns of the inverse give all G(.; w) at once
  std::vector<std::vector<double>> m(n, std::vector<double>(2 * n, 0.0));
  Site nbr[4];
  for (std::size_t i = 0; i < n; ++i) {
    m[i][i] = degree(sites[i]);
    int dg = neighbors(sites[i], nbr);
    for (int j = 0; j < dg; ++j) {
      auto it = index.find(site_key(nbr[j]));
      if (it != index.end()) m[i][it->second] -= 1.0;
    }
    m[i][n + i] = degree(sites[i]);
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t rr = col + 1; rr < n; ++rr)
      if (std::abs(m[rr][col]) > std::abs(m[piv][col])) piv = rr;
    std::swap(m[col], m[piv]);
    double p = m[col][col];
    for (std::size_t j = col; j < 2 * n; ++j) m[col][j] /= p;
    for (std::size_t rr = 0; rr < n; ++rr) {
      if (rr == col || m[rr][col] == 0.0) continue;
      double fpiv = m[rr][col];
      for (std::size_t j = col; j < 2 * n; ++j) m[rr][j] -= fpiv * m[col][j];
    }
  }
  // result[w][x] = G(x; w): entry (x, w) of deg(w) * A^{-1} e_w
  std::vector<std::vector<double>> g(n, std::vector<double>(n));
  for (std::size_t w = 0; w < n; ++w)
    for (std::size_t x = 0; x < n; ++x) g[w][x] = m[x][n + w];
  return g;
}

}  // namespace comb
