#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "comb/lattice.hpp"
#include "comb/rng.hpp"

namespace comb {

// Simple random walk on the comb.  Two execution modes:
//  - naive: one lattice step per RNG draw (ground truth),
//  - shortcut: each visit to a tooth is resolved by exact gambler's-ruin
//    draws, so the cost per walk is proportional to the number of axis
//    events rather than lattice steps.  The two modes are distributionally
//    identical; tests compare them.

struct WalkState {
  Site pos{0, 0};
  std::uint64_t events = 0;  // lattice steps in naive mode, resolved events in shortcut mode
};

inline Site step_site(Site z, Rng& rng) {
  Site nbr[4];
  int dg = neighbors(z, nbr);
  return nbr[rng.next_below(static_cast<std::uint64_t>(dg))];
}

inline WalkState& step(WalkState& s, Rng& rng) {
  s.pos = step_site(s.pos, rng);
  ++s.events;
  return s;
}

// Outcome of one tooth entry at height 1 with absorbing height H:
// absorbed with probability 1/H (at height H), back to base otherwise.
struct ExcursionOutcome {
  bool absorbed = false;
  int height = 0;  // H when absorbed
};

inline ExcursionOutcome tooth_excursion(int absorb_height, Rng& rng) {
  if (absorb_height < 1) throw std::invalid_argument("tooth_excursion: absorb height must be >= 1");
  bool absorbed = rng.next_below(static_cast<std::uint64_t>(absorb_height)) == 0;
  return {absorbed, absorbed ? absorb_height : 0};
}

enum class WalkMode { naive, shortcut };

// Records first-hit indicators for a target set, in either walk mode.
struct HitsRecorder {
  std::vector<Site> targets;
  std::vector<char> hit;
  bool stop_when_all_hit = false;

  explicit HitsRecorder(std::vector<Site> t, bool stop = false)
      : targets(std::move(t)), hit(targets.size(), 0), stop_when_all_hit(stop) {}

  bool all_hit() const {
    for (char h : hit)
      if (!h) return false;
    return true;
  }
  void mark(Site z) {
    for (std::size_t i = 0; i < targets.size(); ++i)
      if (!hit[i] && targets[i] == z) hit[i] = 1;
  }
  bool done() const { return stop_when_all_hit && all_hit(); }
};

namespace detail {

// Exact resolution of a walk on one tooth arm (column x, sign sigma) from
// height y, absorbing at 0 (base) and L (exit).  Unhit recorder targets on
// the arm split the gambler's ruin into first-passage pieces; every height
// interval crossed marks the targets it contains.
// Returns true if absorbed at L.
inline bool resolve_arm(int x, int sigma, int y, int absorb_l, HitsRecorder* rec, Rng& rng,
                        std::uint64_t& events) {
  auto mark_range = [&](int a, int b) {  // heights [a, b]
    if (!rec) return;
    for (std::size_t i = 0; i < rec->targets.size(); ++i) {
      if (rec->hit[i]) continue;
      Site t = rec->targets[i];
      int ay = t.y < 0 ? -t.y : t.y;
      if (t.x == x && (t.y > 0) == (sigma > 0) && t.y != 0 && ay >= a && ay <= b) rec->hit[i] = 1;
    }
  };
  if (rec) rec->mark({x, sigma * y});
  for (;;) {
    if (y == 0) return false;
    if (y >= absorb_l) return true;
    // largest unhit target strictly below, smallest strictly above
    int below = 0, above = 0;
    if (rec) {
      for (std::size_t i = 0; i < rec->targets.size(); ++i) {
        if (rec->hit[i]) continue;
        Site t = rec->targets[i];
        if (t.x != x || (t.y > 0) != (sigma > 0) || t.y == 0) continue;
        int ay = t.y < 0 ? -t.y : t.y;
        if (ay < y && ay > below) below = ay;
        if (ay > y && (above == 0 || ay < above)) above = ay;
      }
    }
    ++events;
    if (below > 0) {
      // any path down passes `below`; reaching L first skips it
      if (rng.next_below(static_cast<std::uint64_t>(absorb_l - below)) <
          static_cast<std::uint64_t>(y - below)) {
        mark_range(y + 1, absorb_l);
        return true;
      }
      y = below;
      rec->mark({x, sigma * y});
    } else if (above > 0 && above < absorb_l) {
      if (rng.next_below(static_cast<std::uint64_t>(above)) < static_cast<std::uint64_t>(y)) {
        y = above;
        rec->mark({x, sigma * y});
      } else {
        return false;
      }
    } else {
      return rng.next_below(static_cast<std::uint64_t>(absorb_l)) <
             static_cast<std::uint64_t>(y);
    }
  }
}

}  // namespace detail

struct ExitResult {
  Site exit_site{0, 0};
  std::uint64_t events = 0;
};

// First site outside D(rho) visited by a walk started at `start`.
// With a stop_when_all_hit recorder the walk is abandoned as soon as every
// target has been hit; the returned site is then the current position.
inline ExitResult run_until_exit(Site start, const Region& r, WalkMode mode, Rng& rng,
                                 HitsRecorder* rec = nullptr) {
  if (!r.contains(start)) throw std::invalid_argument("run_until_exit: start outside region");
  std::uint64_t events = 0;
  if (rec) rec->mark(start);
  if (rec && rec->done()) return {start, events};
  if (mode == WalkMode::naive) {
    Site z = start;
    for (;;) {
      z = step_site(z, rng);
      ++events;
      if (!r.contains(z)) return {z, events};
      if (rec) {
        rec->mark(z);
        if (rec->done()) return {z, events};
      }
    }
  }
  // shortcut mode
  Site z = start;
  if (z.y != 0) {
    int sigma = z.y > 0 ? 1 : -1;
    int l = r.absorb_height(z.x);
    if (detail::resolve_arm(z.x, sigma, sigma * z.y, l, rec, rng, events))
      return {{z.x, sigma * l}, events};
    z = {z.x, 0};
    if (rec) rec->mark(z);
    if (rec && rec->done()) return {z, events};
  }
  for (;;) {
    std::uint64_t d = rng.next_below(4);
    ++events;
    if (d < 2) {
      z.x += d == 0 ? 1 : -1;
      if (!r.contains(z)) return {z, events};
      if (rec) {
        rec->mark(z);
        if (rec->done()) return {z, events};
      }
    } else {
      int sigma = d == 2 ? 1 : -1;
      int l = r.absorb_height(z.x);
      if (detail::resolve_arm(z.x, sigma, 1, l, rec, rng, events))
        return {{z.x, sigma * l}, events};
      if (rec && rec->done()) return {z, events};
    }
  }
}

// Single Bernoulli sample of {H(target) < E(rho)}; shortcut-accelerated.
inline bool hit_before_exit(Site start, Site target, const Region& r, Rng& rng) {
  if (!r.contains(start) || !r.contains(target))
    throw std::invalid_argument("hit_before_exit: start and target must lie in the region");
  if (start == target) return true;
  HitsRecorder rec({target}, true);
  run_until_exit(start, r, WalkMode::shortcut, rng, &rec);
  return rec.hit[0] != 0;
}

}  // namespace comb
