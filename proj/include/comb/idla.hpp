#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "comb/lattice.hpp"
#include "comb/rng.hpp"
#include "comb/walk.hpp"

namespace comb {

// Internal-DLA cluster, interval-encoded: the occupied set of a standard or
// confined growth is parent-closed, so it is an axis interval containing the
// origin plus a contiguous tooth segment per column and arm.  Membership is
// O(1) and memory O(n) instead of O(n^3).
class CombCluster {
 public:
  explicit CombCluster(int capacity)
      : offset_(capacity), up_(2 * capacity + 1, 0), down_(2 * capacity + 1, 0) {}

  std::int64_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  int axis_lo() const { return axis_lo_; }
  int axis_hi() const { return axis_hi_; }
  int up(int x) const { return in_window(x) ? up_[static_cast<std::size_t>(x + offset_)] : 0; }
  int down(int x) const { return in_window(x) ? down_[static_cast<std::size_t>(x + offset_)] : 0; }

  bool contains(Site z) const {
    if (size_ == 0) return false;
    if (z.x < axis_lo_ || z.x > axis_hi_) return false;
    if (z.y == 0) return true;
    return z.y > 0 ? z.y <= up(z.x) : -z.y <= down(z.x);
  }

  void occupy(Site z) {
    if (size_ == 0) {
      assert(z.x == 0 && z.y == 0);
      axis_lo_ = axis_hi_ = 0;
      ++size_;
      return;
    }
    if (z.y == 0) {
      assert(z.x == axis_hi_ + 1 || z.x == axis_lo_ - 1);
      if (z.x > 0) axis_hi_ = z.x; else axis_lo_ = z.x;
    } else {
      assert(z.x >= axis_lo_ && z.x <= axis_hi_);
      int& arm = z.y > 0 ? up_[static_cast<std::size_t>(z.x + offset_)]
                         : down_[static_cast<std::size_t>(z.x + offset_)];
      assert((z.y > 0 ? z.y : -z.y) == arm + 1);
      ++arm;
    }
    ++size_;
  }

  std::vector<Site> site_list() const {
    std::vector<Site> out;
    if (size_ == 0) return out;
    out.reserve(static_cast<std::size_t>(size_));
    for (int x = axis_lo_; x <= axis_hi_; ++x) {
      for (int y = -down(x); y <= up(x); ++y) out.push_back({x, y});
    }
    return out;
  }

 private:
  bool in_window(int x) const {
    return x >= -offset_ && x <= offset_;
  }

  int offset_;
  std::vector<int> up_, down_;
  int axis_lo_ = 1, axis_hi_ = -1;
  std::int64_t size_ = 0;
};

// Settlement policies: standard IDLA, growth confined to a region (explorers
// exiting it are discarded), and the *-explorer rule with inner region D(n)
// and enlarged region Dbar:
//   - inside D(n) a *-explorer behaves like an explorer,
//   - once it exits D(n) it can no longer settle in D(n),
//   - it never settles in Dbar \ D(n),
//   - outside Dbar it behaves like an explorer.
struct SettlementPolicy {
  enum class Kind { standard, confined, star };
  Kind kind = Kind::standard;
  std::optional<Region> region;  // confined region, or the star inner region
  std::optional<Region> outer;   // star: Dbar

  static SettlementPolicy standard() { return {Kind::standard, std::nullopt, std::nullopt}; }
  static SettlementPolicy confined(Region r) { return {Kind::confined, std::move(r), std::nullopt}; }
  static SettlementPolicy star(Region inner, Region dbar) {
    if (dbar.rho() < inner.rho()) throw std::invalid_argument("star policy: outer region smaller than inner");
    return {Kind::star, std::move(inner), std::move(dbar)};
  }
};

// Settlements of *-explorers outside Dbar: contiguous axis stubs past the
// two axis ends and contiguous tooth tufts above Dbar's teeth.
struct StarOuter {
  std::map<int, int> out_up, out_down;  // column -> settled count above Tbar(x)
  int out_axis_pos = 0, out_axis_neg = 0;
  std::int64_t settled = 0;

  int up(int x) const {
    auto it = out_up.find(x);
    return it == out_up.end() ? 0 : it->second;
  }
  int down(int x) const {
    auto it = out_down.find(x);
    return it == out_down.end() ? 0 : it->second;
  }
};

struct GrowResult {
  CombCluster cluster;  // star: the settlements inside D(n)
  std::int64_t launched = 0, settled = 0, discarded = 0;
  StarOuter star;                      // star policy only
  std::int64_t star_tip_count = 0;     // outer settlements with |x| beyond the bulk/tip split
  std::int64_t star_bulk_count = 0;

  explicit GrowResult(CombCluster c) : cluster(std::move(c)) {}
};

struct WaveConfig {
  std::vector<Site> stop_set;
};

struct WavesResult {
  GrowResult result;
  std::vector<std::map<Site, int>> zeta;        // frozen configuration after each wave
  std::vector<std::int64_t> settled_after_wave;  // settled + discarded at each wave boundary
};

namespace detail {

// absorbed at H w.p. 1/H; returned after reaching height >= m w.p. (H-m)/(mH);
// clean return otherwise.  Exact integer thresholds on one draw.
enum class ArmEvent { absorbed, returned_crossed, returned_clean };

inline ArmEvent arm_event(std::int64_t big_h, std::int64_t cross_m, Rng& rng) {
  std::uint64_t r = rng.next_below(static_cast<std::uint64_t>(cross_m * big_h));
  if (r < static_cast<std::uint64_t>(cross_m)) return ArmEvent::absorbed;
  if (r < static_cast<std::uint64_t>(big_h)) return ArmEvent::returned_crossed;
  return ArmEvent::returned_clean;
}

struct StarGeometry {
  const Region* inner = nullptr;
  const Region* outer = nullptr;
  int t_inner(int x) const { return inner->tooth_height(x); }
  int t_outer(int x) const { return outer->tooth_height(x); }
  bool in_inner(Site z) const { return inner->contains(z); }
  bool in_outer(Site z) const { return outer->contains(z); }
};

}  // namespace detail

// Sequential abelian growth.  Explorers are launched one at a time from the
// origin; tooth visits collapse to exact gambler's-ruin draws against the
// current tooth occupation, so per-explorer cost is proportional to axis
// events.  A non-null stop set freezes explorers on first arrival (freeze
// takes precedence over settlement); frozen explorers are returned in zeta.
class Grower {
 public:
  Grower(std::int64_t n_explorers, SettlementPolicy policy)
      : policy_(std::move(policy)),
        result_(CombCluster(static_cast<int>(n_explorers) + 2)) {
    if (n_explorers < 0) throw std::invalid_argument("grow: negative explorer count");
    result_.launched = 0;
    if (policy_.kind == SettlementPolicy::Kind::star) {
      geo_.inner = &*policy_.region;
      geo_.outer = &*policy_.outer;
    }
    if (policy_.kind == SettlementPolicy::Kind::confined && !policy_.region)
      throw std::invalid_argument("confined policy needs a region");
  }

  // Runs one explorer from `from`; returns true if it froze (position and
  // flag written back).  stop==nullptr disables freezing entirely.
  bool run_explorer(Site from, bool exited_inner, const std::vector<Site>* stop, Rng& rng,
                    Site* frozen_pos, bool* frozen_flag) {
    Site pos = from;
    bool exited = exited_inner;
    note_position(pos, exited);
    // settlement check at the start position (fresh launches from the origin
    // settle immediately when the cluster is empty; resumed explorers settle
    // where they stand if it is free)
    if (try_settle(pos, exited)) return false;
    for (;;) {
      if (pos.y != 0) {
        // resumed explorer standing on a tooth: walk the arm naively until
        // it reaches the base or settles/freezes (rare, stop sites only)
        Site nxt = step_site(pos, rng);
        if (arrive(nxt, exited, stop, frozen_pos, frozen_flag, pos)) return true;
        if (settled_) return false;
        continue;
      }
      std::uint64_t d = rng.next_below(4);
      if (d < 2) {
        Site nxt{pos.x + (d == 0 ? 1 : -1), 0};
        if (arrive(nxt, exited, stop, frozen_pos, frozen_flag, pos)) return true;
        if (settled_ || discarded_) return false;
      } else {
        int sigma = d == 2 ? 1 : -1;
        if (arm_entry(pos.x, sigma, exited, stop, rng, frozen_pos, frozen_flag)) return true;
        if (settled_ || discarded_) return false;
      }
    }
  }

  void launch(std::int64_t count, const std::vector<Site>* stop, Rng& rng,
              std::map<Site, int>* frozen_out, std::map<std::pair<Site, bool>, int>* frozen_state) {
    for (std::int64_t i = 0; i < count; ++i) {
      ++result_.launched;
      settled_ = discarded_ = false;
      Site fp;
      bool ff = false;
      if (run_explorer({0, 0}, false, stop, rng, &fp, &ff)) {
        if (frozen_out) (*frozen_out)[fp] += 1;
        if (frozen_state) (*frozen_state)[{fp, ff}] += 1;
      }
    }
  }

  GrowResult take() { return std::move(result_); }
  const GrowResult& result() const { return result_; }

  // resume a frozen explorer
  bool resume(Site pos, bool flag, const std::vector<Site>* stop, Rng& rng, Site* fp, bool* ff) {
    settled_ = discarded_ = false;
    return run_explorer(pos, flag, stop, rng, fp, ff);
  }

  bool occupied(Site z) const {
    if (result_.cluster.contains(z)) return true;
    if (policy_.kind != SettlementPolicy::Kind::star) return false;
    return star_occupied(z);
  }

 private:
  bool star_occupied(Site z) const {
    int xm_out = geo_.outer->xmax();
    if (z.y == 0) {
      if (z.x > xm_out) return z.x <= xm_out + result_.star.out_axis_pos;
      if (z.x < -xm_out) return -z.x <= xm_out + result_.star.out_axis_neg;
      return false;
    }
    int tbar = geo_.t_outer(z.x);
    int ay = z.y < 0 ? -z.y : z.y;
    if (ay <= tbar) return false;
    return ay <= tbar + (z.y > 0 ? result_.star.up(z.x) : result_.star.down(z.x));
  }

  void note_position(Site z, bool& exited) {
    if (policy_.kind == SettlementPolicy::Kind::star && !exited && !geo_.in_inner(z)) exited = true;
  }

  static bool in_stop(Site z, const std::vector<Site>* stop) {
    if (!stop) return false;
    for (Site s : *stop)
      if (s == z) return true;
    return false;
  }

  // Settlement rule at an unoccupied site; returns true if settled.
  bool try_settle(Site z, bool exited) {
    switch (policy_.kind) {
      case SettlementPolicy::Kind::standard:
        if (occupied(z)) return false;
        settle_cluster(z);
        return true;
      case SettlementPolicy::Kind::confined:
        if (!policy_.region->contains(z)) {
          discarded_ = true;
          ++result_.discarded;
          return false;
        }
        if (occupied(z)) return false;
        settle_cluster(z);
        return true;
      case SettlementPolicy::Kind::star: {
        if (occupied(z)) return false;
        if (geo_.in_inner(z)) {
          if (exited) return false;
          settle_cluster(z);
          return true;
        }
        if (geo_.in_outer(z)) return false;  // never settles in Dbar \ D(n)
        settle_star(z);
        return true;
      }
    }
    return false;
  }

  void settle_cluster(Site z) {
    assert(policy_.kind != SettlementPolicy::Kind::star || geo_.in_inner(z));
    result_.cluster.occupy(z);
    ++result_.settled;
    settled_ = true;
  }

  void settle_star(Site z) {
    StarOuter& st = result_.star;
    if (z.y == 0) {
      (z.x > 0 ? st.out_axis_pos : st.out_axis_neg) += 1;
    } else {
      std::map<int, int>& m = z.y > 0 ? st.out_up : st.out_down;
      m[z.x] += 1;
    }
    ++st.settled;
    ++result_.settled;
    settled_ = true;
    // tip/bulk bookkeeping: tip = outer settlements past the midpoint
    // between the two region radii, bulk = along long teeth
    double split = 0.5 * (geo_.inner->rho() + geo_.outer->rho());
    if (std::abs(static_cast<double>(z.x)) > split) ++result_.star_tip_count;
    else ++result_.star_bulk_count;
  }

  // Arrival at a site by an axis move or a naive tooth step.  Returns true
  // if frozen.  Sets settled_/discarded_ as side effects; otherwise the
  // caller continues from `z` (written into cur).
  bool arrive(Site z, bool& exited, const std::vector<Site>* stop, Site* fp, bool* ff, Site& cur) {
    note_position(z, exited);
    if (in_stop(z, stop)) {
      *fp = z;
      *ff = exited;
      return true;
    }
    if (try_settle(z, exited) || discarded_) return false;
    cur = z;
    return false;
  }

  // One draw resolving a full tooth entry from the base of column x, arm
  // sigma, against the current occupation.  Returns true if frozen.
  bool arm_entry(int x, int sigma, bool& exited, const std::vector<Site>* stop, Rng& rng,
                 Site* fp, bool* ff) {
    std::int64_t settle_h = 0;  // height of the first settlement candidate
    std::int64_t flag_h = 0;    // star: reaching this height exits D(n); 0 = n/a
    const CombCluster& c = result_.cluster;
    int k = sigma > 0 ? c.up(x) : c.down(x);
    switch (policy_.kind) {
      case SettlementPolicy::Kind::standard:
      case SettlementPolicy::Kind::confined:
        settle_h = k + 1;
        break;
      case SettlementPolicy::Kind::star: {
        int tn = geo_.t_inner(x);
        if (!exited && k < tn) {
          settle_h = k + 1;  // stays below the inner top, flag untouchable
        } else {
          int kout = sigma > 0 ? result_.star.up(x) : result_.star.down(x);
          settle_h = static_cast<std::int64_t>(geo_.t_outer(x)) + kout + 1;
          if (!exited) flag_h = tn + 1;
        }
        break;
      }
    }
    // stop sites on this arm at heights <= settle_h freeze first
    std::int64_t stop_h = 0;
    if (stop) {
      for (Site s : *stop) {
        if (s.x != x || s.y == 0 || (s.y > 0) != (sigma > 0)) continue;
        std::int64_t ay = s.y < 0 ? -s.y : s.y;
        if (ay <= settle_h && (stop_h == 0 || ay < stop_h)) stop_h = ay;
      }
    }
    std::int64_t absorb = stop_h > 0 ? stop_h : settle_h;
    std::int64_t cross = (flag_h > 0 && flag_h < absorb) ? flag_h : absorb;
    detail::ArmEvent ev = detail::arm_event(absorb, cross, rng);
    if (ev == detail::ArmEvent::returned_clean) return false;
    if (ev == detail::ArmEvent::returned_crossed) {
      if (flag_h > 0 && cross == flag_h) exited = true;
      return false;
    }
    // absorbed at height `absorb`
    Site z{x, sigma * static_cast<int>(absorb)};
    if (flag_h > 0 && absorb >= flag_h) exited = true;
    if (stop_h > 0) {  // absorb == stop_h: freeze takes precedence
      *fp = z;
      *ff = exited;
      return true;
    }
    bool ok = try_settle(z, exited);
    assert(ok || discarded_);
    (void)ok;
    return false;
  }

  SettlementPolicy policy_;
  detail::StarGeometry geo_;
  GrowResult result_;
  bool settled_ = false, discarded_ = false;
};

inline GrowResult grow(std::int64_t n_explorers, const SettlementPolicy& policy, Rng& rng) {
  Grower g(n_explorers, policy);
  g.launch(n_explorers, nullptr, rng, nullptr, nullptr);
  return g.take();
}

// Freeze/resume growth: wave k applies waves[k].stop_set to the explorers
// launched in that round; frozen explorers resume in the next round, and a
// final round with no stop set drains the rest.  With an empty stop set this
// is draw-for-draw identical to grow().
inline WavesResult grow_waves(std::int64_t n_explorers, const SettlementPolicy& policy,
                              const std::vector<WaveConfig>& waves, Rng& rng) {
  for (const WaveConfig& w : waves)
    for (Site s : w.stop_set)
      if (s == Site{0, 0}) throw std::invalid_argument("grow_waves: origin cannot be a stop site");
  Grower g(n_explorers, policy);
  WavesResult out{GrowResult(CombCluster(0)), {}, {}};
  std::map<std::pair<Site, bool>, int> frozen;
  {
    const std::vector<Site>* stop = waves.empty() ? nullptr : &waves[0].stop_set;
    std::map<Site, int> zeta;
    std::map<std::pair<Site, bool>, int> fr;
    g.launch(n_explorers, stop, rng, &zeta, &fr);
    if (!waves.empty()) {
      out.zeta.push_back(std::move(zeta));
      out.settled_after_wave.push_back(g.result().settled + g.result().discarded);
    }
    frozen = std::move(fr);
  }
  for (std::size_t w = 1; !frozen.empty(); ++w) {
    const std::vector<Site>* stop = w < waves.size() ? &waves[w].stop_set : nullptr;
    std::map<Site, int> zeta;
    std::map<std::pair<Site, bool>, int> next;
    for (const auto& [state, count] : frozen) {
      for (int i = 0; i < count; ++i) {
        Site fp;
        bool ff = false;
        if (g.resume(state.first, state.second, stop, rng, &fp, &ff)) {
          zeta[fp] += 1;
          next[{fp, ff}] += 1;
        }
      }
    }
    if (stop) {
      out.zeta.push_back(std::move(zeta));
      out.settled_after_wave.push_back(g.result().settled + g.result().discarded);
    }
    frozen = std::move(next);
  }
  out.result = g.take();
  return out;
}

// Inner/outer fluctuation gaps against D(n +- a sqrt(log n)).
struct ColumnGap {
  int x;
  int gap_up;      // occupied arm height minus T_n(x); negative = deficit
  int gap_down;
  double normalized;  // max |gap| / (n - |x|): deficits scale with the local tooth span
};

struct FluctuationGaps {
  double a_in = 0, a_out = 0;
  double rho_in = 0, rho_out = 0;
  bool size_warning = false;
  std::vector<ColumnGap> columns;
};

inline FluctuationGaps fluctuation_gaps(const CombCluster& c, double n) {
  if (!(n >= 3)) throw std::invalid_argument("fluctuation_gaps: need n >= 3 so sqrt(log n) > 1");
  if (c.empty()) throw std::invalid_argument("fluctuation_gaps: empty cluster");
  FluctuationGaps out;
  Region dn(n);
  out.size_warning = c.size() != dn.volume();
  double sln = std::sqrt(std::log(n));
  // largest rho with D(rho) inside the cluster: per-column constraints
  double rho_in = std::min(static_cast<double>(c.axis_hi() + 1),
                           static_cast<double>(-c.axis_lo() + 1));
  for (int x = c.axis_lo(); x <= c.axis_hi(); ++x) {
    int arm = std::min(c.up(x), c.down(x));
    rho_in = std::min(rho_in, std::abs(static_cast<double>(x)) + std::sqrt(3.0 * (arm + 1)));
  }
  // smallest rho with the cluster inside D(rho): sup of Rbar over the cluster
  double rho_out = std::max(static_cast<double>(c.axis_hi()), static_cast<double>(-c.axis_lo()));
  for (int x = c.axis_lo(); x <= c.axis_hi(); ++x) {
    int arm = std::max(c.up(x), c.down(x));
    if (arm > 0)
      rho_out = std::max(rho_out, std::abs(static_cast<double>(x)) + std::sqrt(3.0 * arm));
  }
  out.rho_in = rho_in;
  out.rho_out = rho_out;
  out.a_in = std::max(0.0, (n - rho_in) / sln);
  out.a_out = std::max(0.0, (rho_out - n) / sln);
  for (int x = c.axis_lo(); x <= c.axis_hi(); ++x) {
    int t = dn.tooth_height(x);
    ColumnGap g{x, c.up(x) - t, c.down(x) - t, 0.0};
    double denom = n - std::abs(static_cast<double>(x));
    if (denom > 0)
      g.normalized = std::max(std::abs(g.gap_up), std::abs(g.gap_down)) / denom;
    out.columns.push_back(g);
  }
  return out;
}

// The full occupancy of D(rho) as a cluster (test fixtures, crossing sets).
inline CombCluster cluster_from_region(const Region& r, int capacity = 0) {
  int cap = std::max(capacity, r.xmax() + 2);
  CombCluster c(cap);
  c.occupy({0, 0});
  for (int x = 1; x <= r.xmax(); ++x) c.occupy({x, 0});
  for (int x = -1; x >= -r.xmax(); --x) c.occupy({x, 0});
  for (int x = -r.xmax(); x <= r.xmax(); ++x) {
    int t = r.tooth_height(x);
    for (int y = 1; y <= t; ++y) {
      c.occupy({x, y});
      c.occupy({x, -y});
    }
  }
  return c;
}

// Empirical P((R,0) in A(n)) in the sparse regime d(n) < beta R^3.
struct TentacleResult {
  std::int64_t replicas = 0;
  std::int64_t hits = 0;
  double frequency = 0;
  double wilson_lo = 0, wilson_hi = 0;
};

inline TentacleResult tentacle_experiment(int n, int R, std::int64_t replicas, double beta,
                                          std::uint64_t seed) {
  std::int64_t dn = Region(static_cast<double>(n)).volume();
  if (!(static_cast<double>(dn) < beta * R * R * R))
    throw std::invalid_argument("tentacle_experiment: outside corollary regime (d(n) >= beta R^3)");
  TentacleResult out;
  out.replicas = replicas;
  for (std::int64_t i = 0; i < replicas; ++i) {
    Rng rng(seed, static_cast<std::uint64_t>(i));
    GrowResult g = grow(dn, SettlementPolicy::standard(), rng);
    if (g.cluster.contains({R, 0})) ++out.hits;
  }
  out.frequency = static_cast<double>(out.hits) / static_cast<double>(replicas);
  // Wilson 95% interval
  double z = 1.959963984540054;
  double nn = static_cast<double>(replicas);
  double p = out.frequency;
  double denom = 1.0 + z * z / nn;
  double center = (p + z * z / (2 * nn)) / denom;
  double half = z * std::sqrt(p * (1 - p) / nn + z * z / (4 * nn * nn)) / denom;
  out.wilson_lo = std::max(0.0, center - half);
  out.wilson_hi = std::min(1.0, center + half);
  return out;
}

}  // namespace comb
