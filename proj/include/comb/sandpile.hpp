#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>
#include <stdexcept>
#include <vector>

#include "comb/lattice.hpp"

namespace comb {

// Divisible sandpile on the comb: start with `initial_mass` at the origin,
// topple any site with mass > 1 by keeping 1 and sending the excess in equal
// shares to its neighbors.  The final state does not depend on the toppling
// order (abelian); two schedules are provided:
//   - priority_queue: literal pointwise toppling, largest excess first;
//   - sweep: column-block sweeps — Gauss-Seidel passes over the axis plus an
//     exact per-tooth stabilization (the closed-form limit of toppling the
//     tooth's sites until all are at most 1).  Orders of magnitude faster on
//     long teeth and, by abelianness, the same limit.
enum class SandpileSchedule { sweep, priority_queue };

class SandpileState {
 public:
  SandpileState(double initial_mass, double tol, SandpileSchedule schedule, int axis_window)
      : initial_mass_(initial_mass),
        tol_(tol),
        schedule_(schedule),
        w_(axis_window),
        axis_mass_(2 * axis_window + 1, 0.0),
        axis_odo_(2 * axis_window + 1, 0.0),
        up_mass_(2 * axis_window + 1),
        dn_mass_(2 * axis_window + 1),
        up_odo_(2 * axis_window + 1),
        dn_odo_(2 * axis_window + 1) {
    axis_mass_[static_cast<std::size_t>(axis_window)] = initial_mass;
  }

  double initial_mass() const { return initial_mass_; }
  double tol() const { return tol_; }
  SandpileSchedule schedule() const { return schedule_; }
  std::int64_t iterations() const { return iterations_; }
  bool converged() const { return converged_; }
  int axis_window() const { return w_; }

  double mass(Site z) const {
    if (z.x < -w_ || z.x > w_) return 0.0;
    std::size_t c = col(z.x);
    if (z.y == 0) return axis_mass_[c];
    const std::vector<double>& arm = z.y > 0 ? up_mass_[c] : dn_mass_[c];
    std::size_t h = static_cast<std::size_t>(z.y > 0 ? z.y : -z.y) - 1;
    return h < arm.size() ? arm[h] : 0.0;
  }

  double odometer(Site z) const {
    if (z.x < -w_ || z.x > w_) return 0.0;
    std::size_t c = col(z.x);
    if (z.y == 0) return axis_odo_[c];
    const std::vector<double>& arm = z.y > 0 ? up_odo_[c] : dn_odo_[c];
    std::size_t h = static_cast<std::size_t>(z.y > 0 ? z.y : -z.y) - 1;
    return h < arm.size() ? arm[h] : 0.0;
  }

  bool in_cluster(Site z) const { return odometer(z) > 0.0; }

  // Kahan-compensated global mass (conservation check)
  double total_mass() const {
    double s = 0, comp = 0;
    auto add = [&](double v) {
      double y = v - comp;
      double t = s + y;
      comp = (t - s) - y;
      s = t;
    };
    for (std::size_t c = 0; c < axis_mass_.size(); ++c) {
      add(axis_mass_[c]);
      for (double v : up_mass_[c]) add(v);
      for (double v : dn_mass_[c]) add(v);
    }
    return s;
  }

  double total_excess() const {
    double s = 0;
    for (std::size_t c = 0; c < axis_mass_.size(); ++c) {
      if (axis_mass_[c] > 1.0) s += axis_mass_[c] - 1.0;
      for (double v : up_mass_[c])
        if (v > 1.0) s += v - 1.0;
      for (double v : dn_mass_[c])
        if (v > 1.0) s += v - 1.0;
    }
    return s;
  }

  std::vector<Site> cluster_sites() const {
    std::vector<Site> out;
    for (int x = -w_; x <= w_; ++x) {
      std::size_t c = col(x);
      const std::vector<double>& dn = dn_odo_[c];
      for (std::size_t h = dn.size(); h-- > 0;)
        if (dn[h] > 0) out.push_back({x, -static_cast<int>(h) - 1});
      if (axis_odo_[c] > 0) out.push_back({x, 0});
      const std::vector<double>& up = up_odo_[c];
      for (std::size_t h = 0; h < up.size(); ++h)
        if (up[h] > 0) out.push_back({x, static_cast<int>(h) + 1});
    }
    return out;
  }

  friend SandpileState topple(double, double, SandpileSchedule, std::int64_t);

 private:
  std::size_t col(int x) const { return static_cast<std::size_t>(x + w_); }

  void ensure_arm(std::vector<double>& v, std::size_t h) {
    if (v.size() < h) v.resize(h, 0.0);
  }

  // Exact stabilization of one tooth arm.  Mass enters the arm only at
  // height 1 (pushed up from the base), so the set of toppling sites is a
  // prefix [1..p].  The odometer solves
  //     u(j-1) - 2 u(j) + u(j+1) = 2 (1 - m(j)),  u(0) = u(p+1) = 0,
  // with final masses 1 on [1..p]; u_1/2 flows back to the base.
  // Returns the emission to the base.
  double stabilize_arm(std::vector<double>& m, std::vector<double>& odo, int& frontier) {
    if (m.empty() || m[0] <= 1.0) return 0.0;
    int p = std::max(frontier, 1);
    std::vector<double> u;
    for (int guard = 0; guard < 100000; ++guard) {
      ++iterations_;
      if (static_cast<std::size_t>(p) + 1 > m.size()) ensure_arm(m, static_cast<std::size_t>(p) + 1);
      // u(j) = B*j - Q(j) with Q(j) = sum_{i<j} (j-i) f(i), f = 2(m-1)
      u.assign(static_cast<std::size_t>(p) + 2, 0.0);
      double s1 = 0, s2 = 0;  // sum f_i, sum i*f_i over i <= j-1
      std::vector<double> q(static_cast<std::size_t>(p) + 2, 0.0);
      for (int j = 1; j <= p + 1; ++j) {
        q[static_cast<std::size_t>(j)] = j * s1 - s2;
        double f = 2.0 * (m[static_cast<std::size_t>(j - 1)] - 1.0);
        s1 += f;
        s2 += j * f;
      }
      double b = q[static_cast<std::size_t>(p) + 1] / (p + 1);
      bool neg = false;
      for (int j = 1; j <= p; ++j) {
        u[static_cast<std::size_t>(j)] = b * j - q[static_cast<std::size_t>(j)];
        if (u[static_cast<std::size_t>(j)] <= 0) neg = true;
      }
      if (neg) {
        --p;
        if (p == 0) return 0.0;
        continue;
      }
      double w_next = m[static_cast<std::size_t>(p)] + 0.5 * u[static_cast<std::size_t>(p)];
      if (w_next > 1.0 + 1e-15) {
        ++p;
        continue;
      }
      // commit
      ensure_arm(odo, static_cast<std::size_t>(p));
      for (int j = 1; j <= p; ++j) {
        odo[static_cast<std::size_t>(j - 1)] += u[static_cast<std::size_t>(j)];
        m[static_cast<std::size_t>(j - 1)] = 1.0;
      }
      m[static_cast<std::size_t>(p)] = w_next;
      frontier = p;
      return 0.5 * u[1];
    }
    throw std::runtime_error("sandpile: arm stabilization did not converge");
  }

  double initial_mass_, tol_;
  SandpileSchedule schedule_;
  int w_;
  std::vector<double> axis_mass_, axis_odo_;
  std::vector<std::vector<double>> up_mass_, dn_mass_, up_odo_, dn_odo_;
  std::int64_t iterations_ = 0;
  bool converged_ = false;

  friend class SandpileRunner;
};

// smallest n with |D(n)| >= mass (the mass <-> radius dictionary; for the
// exact masses d(n) this returns n itself)
inline double radius_for_mass(double mass) {
  if (mass <= 1.0) return 1.0;
  double lo = 1.0, hi = 2.0;
  while (static_cast<double>(Region(hi).volume()) < mass) hi *= 2;
  for (int it = 0; it < 200 && hi - lo > 1e-9; ++it) {
    double mid = 0.5 * (lo + hi);
    if (static_cast<double>(Region(mid).volume()) >= mass) hi = mid;
    else lo = mid;
  }
  return hi;
}

// Alternative mass normalization: a reduced parameter m with n^3 = 9 m / 4.
inline double radius_from_reduced_mass(double n_prime) { return std::cbrt(9.0 * n_prime / 4.0); }

class SandpileRunner {
 public:
  static SandpileState run(double initial_mass, double tol, SandpileSchedule schedule,
                           std::int64_t max_iterations) {
    if (!(initial_mass > 0)) throw std::invalid_argument("topple: initial mass must be > 0");
    if (!(tol > 0)) throw std::invalid_argument("topple: tol must be > 0");
    int window = static_cast<int>(std::ceil(radius_for_mass(initial_mass))) + 8;
    SandpileState s(initial_mass, tol, schedule, window);
    if (schedule == SandpileSchedule::sweep) run_sweep(s, max_iterations);
    else run_priority_queue(s, max_iterations);
    return s;
  }

 private:
  static void run_sweep(SandpileState& s, std::int64_t max_iterations) {
    const int w = s.w_;
    std::vector<int> frontier_up(static_cast<std::size_t>(2 * w + 1), 0);
    std::vector<int> frontier_dn(static_cast<std::size_t>(2 * w + 1), 0);
    while (s.iterations_ < max_iterations) {
      // axis Gauss-Seidel: per topple, e/4 to each axis neighbor and e/4
      // into the first site of each arm
      double axis_excess;
      int micro = 0;
      do {
        axis_excess = 0;
        for (int x = -w; x <= w; ++x) {
          std::size_t c = s.col(x);
          double m = s.axis_mass_[c];
          if (m <= 1.0) continue;
          double e = m - 1.0;
          axis_excess += e;
          s.axis_mass_[c] = 1.0;
          s.axis_odo_[c] += e;
          if (x + 1 <= w) s.axis_mass_[c + 1] += 0.25 * e;
          if (x - 1 >= -w) s.axis_mass_[c - 1] += 0.25 * e;
          s.ensure_arm(s.up_mass_[c], 1);
          s.ensure_arm(s.dn_mass_[c], 1);
          s.up_mass_[c][0] += 0.25 * e;
          s.dn_mass_[c][0] += 0.25 * e;
          ++s.iterations_;
        }
      } while (axis_excess > 0.01 * s.tol_ && ++micro < 256);
      // arms: exact stabilization, emissions return to the bases
      double arm_excess = 0;
      for (int x = -w; x <= w; ++x) {
        std::size_t c = s.col(x);
        if (!s.up_mass_[c].empty() && s.up_mass_[c][0] > 1.0) {
          s.ensure_arm(s.up_odo_[c], s.up_mass_[c].size());
          s.axis_mass_[c] += s.stabilize_arm(s.up_mass_[c], s.up_odo_[c],
                                             frontier_up[c]);
        }
        if (!s.dn_mass_[c].empty() && s.dn_mass_[c][0] > 1.0) {
          s.ensure_arm(s.dn_odo_[c], s.dn_mass_[c].size());
          s.axis_mass_[c] += s.stabilize_arm(s.dn_mass_[c], s.dn_odo_[c],
                                             frontier_dn[c]);
        }
        double am = s.axis_mass_[c];
        if (am > 1.0) arm_excess += am - 1.0;
      }
      if (arm_excess + axis_excess < s.tol_) {
        s.converged_ = true;
        return;
      }
    }
    throw std::runtime_error("sandpile sweep: iteration cap reached before convergence");
  }

  struct Entry {
    double excess;
    Site z;
    bool operator<(const Entry& other) const { return excess < other.excess; }
  };

  static void run_priority_queue(SandpileState& s, std::int64_t max_iterations) {
    const int w = s.w_;
    std::priority_queue<Entry> pq;
    // sites whose excess falls below push_eps are left alone; the leftover
    // total stays well under tol (at most #sites * push_eps)
    double site_bound = 6.0 * static_cast<double>(Region(radius_for_mass(s.initial_mass_)).volume()) + 64.0;
    double push_eps = s.tol_ / site_bound;
    auto push_if_excess = [&](Site z) {
      double m = s.mass(z);
      if (m - 1.0 > push_eps) pq.push({m - 1.0, z});
    };
    push_if_excess({0, 0});
    auto add_mass = [&](Site z, double dm) {
      if (z.x < -w || z.x > w) throw std::runtime_error("sandpile: axis window overflow");
      std::size_t c = s.col(z.x);
      if (z.y == 0) {
        s.axis_mass_[c] += dm;
      } else {
        std::vector<double>& arm = z.y > 0 ? s.up_mass_[c] : s.dn_mass_[c];
        std::size_t h = static_cast<std::size_t>(z.y > 0 ? z.y : -z.y);
        s.ensure_arm(arm, h);
        arm[h - 1] += dm;
      }
      push_if_excess(z);
    };
    while (!pq.empty()) {
      Entry top = pq.top();
      pq.pop();
      double m = s.mass(top.z);
      if (m - 1.0 != top.excess) continue;  // stale: a fresher entry exists
      double e = m - 1.0;
      std::size_t c = s.col(top.z.x);
      if (top.z.y == 0) {
        s.axis_mass_[c] = 1.0;
        s.axis_odo_[c] += e;
        add_mass({top.z.x + 1, 0}, 0.25 * e);
        add_mass({top.z.x - 1, 0}, 0.25 * e);
        add_mass({top.z.x, 1}, 0.25 * e);
        add_mass({top.z.x, -1}, 0.25 * e);
      } else {
        std::vector<double>& arm = top.z.y > 0 ? s.up_mass_[c] : s.dn_mass_[c];
        std::vector<double>& odo = top.z.y > 0 ? s.up_odo_[c] : s.dn_odo_[c];
        std::size_t h = static_cast<std::size_t>(top.z.y > 0 ? top.z.y : -top.z.y);
        arm[h - 1] = 1.0;
        s.ensure_arm(odo, h);
        odo[h - 1] += e;
        int sg = top.z.y > 0 ? 1 : -1;
        add_mass({top.z.x, sg * (static_cast<int>(h) + 1)}, 0.5 * e);
        add_mass({top.z.x, sg * (static_cast<int>(h) - 1)}, 0.5 * e);
      }
      if (++s.iterations_ > max_iterations)
        throw std::runtime_error("sandpile priority queue: iteration cap reached");
    }
    if (s.total_excess() < s.tol_) s.converged_ = true;
    else throw std::runtime_error("sandpile priority queue: drained above tolerance");
  }
};

// Topple to convergence: total excess above height 1 below tol
// (tol <= 0 selects the default 1e-9 * initial_mass).
inline SandpileState topple(double initial_mass, double tol = 0,
                            SandpileSchedule schedule = SandpileSchedule::sweep,
                            std::int64_t max_iterations = 400000000) {
  if (tol <= 0) tol = 1e-9 * initial_mass;
  return SandpileRunner::run(initial_mass, tol, schedule, max_iterations);
}

// Obstacle function majorizing the sandpile odometer, O(1/n^5) term dropped:
//   gamma_n(x,y) = 1/2 (y - 1/2((2/3)x^2 - t x + (9/24) t^2 + 1/6))^2,
//   t = T - (20/27)/T,  T = (4/3) n.
inline double obstacle_gamma(double n, double x, double y) {
  double big_t = 4.0 * n / 3.0;
  double t = big_t - (20.0 / 27.0) / big_t;
  double inner = y - 0.5 * ((2.0 / 3.0) * x * x - t * x + (9.0 / 24.0) * t * t + 1.0 / 6.0);
  return 0.5 * inner * inner;
}

// sup of gamma_n over the continuous boundary |y| = (n-x)^2/3, x in [0, n]
inline double obstacle_gamma_sup(double n, int grid = 4096) {
  double best = 0;
  for (int i = 0; i <= grid; ++i) {
    double x = n * static_cast<double>(i) / grid;
    double y = (n - x) * (n - x) / 3.0;
    best = std::max(best, obstacle_gamma(n, x, y));
  }
  return best;
}

// Smallest R with D(n) erode B(R) <= cluster <= D(n) dilate B(R)
// (Euclidean balls of radius R).  The generic version takes the cluster as
// a site list plus a membership predicate.
template <typename ContainsFn>
double inclusion_radius(const std::vector<Site>& cluster, ContainsFn in_cluster, double n) {
  Region dn(n);
  int xm = dn.xmax();
  double r_out = 0, r_in = 0;
  // outward: distance from cluster sites outside D(n) to D(n)
  for (Site z : cluster) {
    if (dn.contains(z)) continue;
    double best = std::hypot(std::abs(z.x) - static_cast<double>(xm), static_cast<double>(z.y));
    for (int x = std::max(-xm, z.x - 16); x <= std::min(xm, z.x + 16); ++x) {
      int t = dn.tooth_height(x);
      int cy = std::clamp(z.y, -t, t);
      double dx = z.x - x, dy = z.y - cy;
      best = std::min(best, std::sqrt(dx * dx + dy * dy));
    }
    r_out = std::max(r_out, best);
  }
  // inward: distance from uncovered D(n) sites to the complement of D(n)
  for (int x = -xm; x <= xm; ++x) {
    int t = dn.tooth_height(x);
    for (int sg = -1; sg <= 1; sg += 2) {
      // uncovered sites form the top of each arm; scan down until covered
      for (int y = t; y >= 0; --y) {
        Site z{x, sg * y};
        if (in_cluster(z)) break;
        double best = static_cast<double>(dn.tooth_height(x) + 1 - y);
        for (int xx = x - 16; xx <= x + 16; ++xx) {
          int tt = std::abs(xx) > xm ? -1 : dn.tooth_height(xx);
          double dx = x - xx;
          if (tt < 0) best = std::min(best, std::sqrt(dx * dx));  // whole column outside
          else if (std::abs(z.y) <= tt) best = std::min(best, std::hypot(dx, static_cast<double>(tt + 1 - std::abs(z.y))));
          else best = std::min(best, std::sqrt(dx * dx));
        }
        r_in = std::max(r_in, best);
        if (y == 0) break;
      }
      if (t == 0) break;  // single axis site, no second arm
    }
  }
  return std::max(r_out, r_in);
}

inline double inclusion_radius(const SandpileState& s, double n) {
  return inclusion_radius(s.cluster_sites(), [&s](Site z) { return s.in_cluster(z); }, n);
}

}  // namespace comb
