#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "comb/harmonic.hpp"
#include "comb/idla.hpp"
#include "comb/lattice.hpp"
#include "comb/rng.hpp"
#include "comb/walk.hpp"

namespace comb {

// Flashing time tau*_rho: draw R with density g_rho(r) = 3r^2/rho^3 on
// [0, rho]; flash at the origin if R < 1/2, otherwise at the first exit of
// D(R).  Achieves near-uniform hitting of D(rho).

struct FlashSample {
  double radius = 0;
  Site site{0, 0};
  bool at_origin = false;
};

inline FlashSample sample_flash(double rho, Rng& rng, int center_x = 0) {
  if (!(rho > 0)) throw std::invalid_argument("sample_flash: rho must be > 0");
  double radius = rho * std::cbrt(rng.next_double());
  if (radius < 0.5) return {radius, {center_x, 0}, true};
  Region reg(radius);
  ExitResult e = run_until_exit({0, 0}, reg, WalkMode::shortcut, rng);
  return {radius, {e.exit_site.x + center_x, e.exit_site.y}, false};
}

// Exact law of S(tau*_rho).  P(S = z) integrates the exit law of D(r)
// against g_rho over r in (R(z), Rbar(z)] cap (1/2, rho].  The lattice
// region D(r) is constant between consecutive values of Rbar, so the
// integral is an exact finite sum with weights (v_{j+1}^3 - v_j^3)/rho^3.
struct FlashDistribution {
  double rho = 0;
  std::map<Site, double> probs;  // support: D(rho) and its boundary
  double total = 0;
  double min_scaled = 0, max_scaled = 0;  // |D(rho)| * P(z) over z in D(rho)
  double uniformity_ratio = 0;            // max_scaled / min_scaled
};

inline void finalize(FlashDistribution& out) {
  Region reg(out.rho);
  double vol = static_cast<double>(reg.volume());
  out.total = 0;
  double mn = 1e300, mx = 0;
  for (const auto& [z, p] : out.probs) {
    out.total += p;
    if (reg.contains(z)) {
      mn = std::min(mn, p * vol);
      mx = std::max(mx, p * vol);
    }
  }
  out.min_scaled = mn;
  out.max_scaled = mx;
  out.uniformity_ratio = mn > 0 ? mx / mn : 0;
}

inline FlashDistribution flash_distribution_exact(double rho) {
  if (!(rho > 0)) throw std::invalid_argument("flash_distribution_exact: rho must be > 0");
  if (rho > 30.0) throw std::invalid_argument("flash_distribution_exact: capped at rho <= 30");
  FlashDistribution out;
  out.rho = rho;
  double rho3 = rho * rho * rho;
  out.probs[{0, 0}] = std::min(1.0, 0.125 / rho3);  // P(R < 1/2)
  if (rho <= 0.5) {
    finalize(out);
    return out;
  }
  // breakpoints: all Rbar values in (1/2, rho)
  std::vector<double> cuts;
  for (int x = 0; static_cast<double>(x) < rho; ++x) {
    for (int y = 0;; ++y) {
      double v = x + std::sqrt(3.0 * y);
      if (v >= rho) break;
      if (v > 0.5) cuts.push_back(v);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](double a, double b) { return b - a < 1e-9; }),
             cuts.end());
  std::vector<double> grid;
  grid.push_back(0.5);
  for (double c : cuts) grid.push_back(c);
  grid.push_back(rho);
  for (std::size_t j = 0; j + 1 < grid.size(); ++j) {
    double lo = grid[j], hi = grid[j + 1];
    if (hi - lo < 1e-12) continue;
    double weight = (hi * hi * hi - lo * lo * lo) / rho3;
    Region reg(0.5 * (lo + hi));  // any r in the open interval gives the same set
    HarmonicField f = green_origin_field(reg);
    for (Site z : reg.boundary()) out.probs[z] += 0.25 * weight * f.value(parent(z));
  }
  finalize(out);
  return out;
}

inline FlashDistribution flash_distribution_mc(double rho, std::int64_t samples, Rng& rng) {
  FlashDistribution out;
  out.rho = rho;
  for (std::int64_t i = 0; i < samples; ++i) {
    FlashSample s = sample_flash(rho, rng);
    out.probs[s.site] += 1.0;
  }
  for (auto& [z, p] : out.probs) p /= static_cast<double>(samples);
  finalize(out);
  return out;
}

// ---------------------------------------------------------------------------
// Flashing explorers and the crossing experiment.
// Scale h (integer here), M_h = floor(R/(2h)) disjoint translated domains
// D(Z_i, h) with centers Z_i = (2i-1) h covering [0, 2 h M_h].
// ---------------------------------------------------------------------------

struct ScaleDecomposition {
  int h = 0;
  int m = 0;
  std::vector<int> centers;        // x-coordinates of Z_1..Z_M
  std::vector<char> well_covered;  // Gamma_h membership per domain
  std::int64_t domain_volume = 0;  // |D(h)|
};

// |D(center, h) cap V| for an interval-encoded site set V
inline std::int64_t translated_intersection(const Region& dh, int center, const CombCluster& v) {
  std::int64_t count = 0;
  for (int dx = -dh.xmax(); dx <= dh.xmax(); ++dx) {
    int x = center + dx;
    if (!v.contains({x, 0})) continue;
    int t = dh.tooth_height(dx);
    count += 1 + std::min(t, v.up(x)) + std::min(t, v.down(x));
  }
  return count;
}

inline ScaleDecomposition scale_decomposition(int r_target, int h, double beta,
                                              const CombCluster& v) {
  if (h < 1 || 2 * h > r_target)
    throw std::invalid_argument("scale_decomposition: need 1 <= h <= R/2");
  ScaleDecomposition out;
  out.h = h;
  out.m = r_target / (2 * h);
  Region dh(static_cast<double>(h));
  out.domain_volume = dh.volume();
  for (int i = 1; i <= out.m; ++i) {
    int center = (2 * i - 1) * h;
    out.centers.push_back(center);
    std::int64_t inter = translated_intersection(dh, center, v);
    out.well_covered.push_back(static_cast<double>(inter) >
                               beta * static_cast<double>(out.domain_volume));
  }
  return out;
}

// upper bound exp(a3 - kappa3 sqrt(R^3/|V|)) on the crossing probability; vacuous when >= 1
struct CrossingBound {
  double value = 0;
  bool vacuous = false;
};

inline CrossingBound crossing_bound(int r_target, std::int64_t v_size, double a3, double kappa3) {
  double b = std::exp(a3 - kappa3 * std::sqrt(std::pow(static_cast<double>(r_target), 3) /
                                              static_cast<double>(v_size)));
  return {b, b >= 1.0};
}

// optimizing scale h* = sqrt(6/(beta alpha)) * sqrt(|V|/R)
inline double optimal_scale(int r_target, std::int64_t v_size, double beta, double alpha) {
  return std::sqrt(6.0 / (beta * alpha)) *
         std::sqrt(static_cast<double>(v_size) / static_cast<double>(r_target));
}

struct CrossingResult {
  std::int64_t replicas = 0;
  std::int64_t crossings = 0;
  double frequency = 0;
  ScaleDecomposition scales;
  std::vector<std::int64_t> flash_draws;     // per domain
  std::vector<std::int64_t> flash_survived;  // flash landed inside V
  double max_survival_not_covered = 0;       // largest measured survival rate, not-well-covered domains
  double cross8_bound = 1.0;                 // product-form bound with measured inputs
  bool cross8_vacuous = true;
  double h_star = 0;
};

// Flashing explorers from the origin: settle at the first flash landing
// outside V; crossing = reaching (R,0) before settling.  Between flashes the
// walk is a simple random walk, and since every event (center first-visits,
// the target, flash domains) lies to the right on the axis, the recurrent
// walk segments between events collapse to their a.s. outcome.
inline CrossingResult crossing_experiment(int r_target, const CombCluster& v, int h, double beta,
                                          std::int64_t replicas, std::uint64_t seed) {
  if (!v.contains({0, 0}) || !v.contains({r_target, 0}))
    throw std::invalid_argument("crossing_experiment: V must contain (0,0) and (R,0)");
  CrossingResult out;
  out.replicas = replicas;
  out.scales = scale_decomposition(r_target, h, beta, v);
  const int m = out.scales.m;
  out.flash_draws.assign(static_cast<std::size_t>(m), 0);
  out.flash_survived.assign(static_cast<std::size_t>(m), 0);
  for (std::int64_t rep = 0; rep < replicas; ++rep) {
    Rng rng(seed, static_cast<std::uint64_t>(rep));
    bool crossed = false, settled = false;
    for (int i = 0; i < m && !settled && !crossed; ++i) {
      int center = out.scales.centers[static_cast<std::size_t>(i)];
      // the walk reaches Z_i almost surely before any later event
      ++out.flash_draws[static_cast<std::size_t>(i)];
      double radius = h * std::cbrt(rng.next_double());
      Site flash_site{center, 0};
      if (radius >= 0.5) {
        Region reg(radius);
        ExitResult e = run_until_exit({0, 0}, reg, WalkMode::shortcut, rng);
        flash_site = {e.exit_site.x + center, e.exit_site.y};
        if (flash_site == Site{r_target, 0}) {
          crossed = true;
          ++out.flash_survived[static_cast<std::size_t>(i)];
          break;
        }
      }
      if (v.contains(flash_site)) ++out.flash_survived[static_cast<std::size_t>(i)];
      else settled = true;
    }
    if (!settled) crossed = true;  // survived every flash: recurrence reaches (R,0)
    if (crossed) ++out.crossings;
  }
  out.frequency = static_cast<double>(out.crossings) / static_cast<double>(replicas);
  // measured survival probabilities feed the product-form crossing bound
  double p_max = 0;
  int not_covered = 0;
  for (int i = 0; i < m; ++i) {
    if (out.scales.well_covered[static_cast<std::size_t>(i)]) continue;
    ++not_covered;
    if (out.flash_draws[static_cast<std::size_t>(i)] > 0)
      p_max = std::max(p_max, static_cast<double>(out.flash_survived[static_cast<std::size_t>(i)]) /
                                  static_cast<double>(out.flash_draws[static_cast<std::size_t>(i)]));
  }
  out.max_survival_not_covered = p_max;
  double alpha = static_cast<double>(out.scales.domain_volume) /
                 std::pow(static_cast<double>(h), 3);
  out.h_star = optimal_scale(r_target, v.size(), beta, alpha);
  if (p_max > 0 && p_max < 1 && not_covered > 0) {
    double expo = std::log(1.0 / p_max) *
                  (static_cast<double>(r_target) / (2.0 * h) - 1.0 -
                   static_cast<double>(v.size()) / (beta * alpha * std::pow(static_cast<double>(h), 3)));
    out.cross8_bound = std::exp(-expo);
    out.cross8_vacuous = out.cross8_bound >= 1.0;
  }
  return out;
}

}  // namespace comb
