#pragma once

// Analytic dangerous windows for DRO synchronizer chains.
//
// Slacks live in (0, P]. A slack interval (lo, hi] is "dangerous" when a data
// pulse arriving that far ahead of the capturing edge ends with VALID_OUT and
// DATA_OUT in different read cycles. Widths shrink by ~10^3 per extra stage,
// so everything here runs in 50-digit binary floating point.

#include <algorithm>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "timing_model.hpp"

namespace sfq {

using Real = boost::multiprecision::cpp_bin_float_50;

/// Delays (ps) seen by the synchronizer chain, all relative to a read-clock
/// source edge. `link_path` is the effective Q → next-D delay after clock
/// skew between neighbouring sync DROs has been folded in.
struct SyncGeometry {
  double period = 0;
  double clock_insertion = 0;  // read clock source → sync DRO clock pin
  double valid_path = 0;       // last sync DRO Q → VALID_OUT
  double data_path = 0;        // last sync DRO Q → DATA_OUT
  double link_path = 0;        // sync DRO Q → next sync DRO D
};

struct SlackInterval {
  Real lo, hi;  // (lo, hi]
};

struct DangerousWindow {
  std::vector<SlackInterval> intervals;  // disjoint, sorted

  Real width() const {
    Real w = 0;
    for (const auto& iv : intervals) w += iv.hi - iv.lo;
    return w;
  }
  bool empty() const { return intervals.empty(); }
  bool contains(const Real& s) const {
    for (const auto& iv : intervals)
      if (s > iv.lo && s <= iv.hi) return true;
    return false;
  }
  /// Smallest distance from s to any interval endpoint.
  Real edge_distance(const Real& s) const {
    Real d = std::numeric_limits<Real>::max();
    for (const auto& iv : intervals) d = std::min({d, abs(s - iv.lo), abs(s - iv.hi)});
    return d;
  }
};

namespace detail {

struct QInterval {
  Real lo, hi;  // [lo, hi)
};

inline Real q_of(const ClockToQModel& m, const Real& s, bool& deferred) {
  const Real sf = m.delta_fail;
  deferred = !(s > sf);
  if (deferred) return 0;
  const Real x = s - sf;
  const Real c = m.c;
  if (x >= c) return Real(m.d_nom);
  return std::max(Real(m.d_nom), Real(m.d_nom) + Real(m.tau) * log(c / x));
}

inline Real q_cap(const ClockToQModel& m) { return Real(m.d_nom) + Real(m.tau) * 120; }

inline std::vector<SlackInterval> merge(std::vector<SlackInterval> v, const Real& P) {
  std::vector<SlackInterval> out;
  for (auto& iv : v) {
    iv.lo = std::max(iv.lo, Real(0));
    iv.hi = std::min(iv.hi, P);
  }
  std::erase_if(v, [](const SlackInterval& iv) { return !(iv.hi > iv.lo); });
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.lo < b.lo; });
  for (auto& iv : v) {
    if (!out.empty() && iv.lo <= out.back().hi)
      out.back().hi = std::max(out.back().hi, iv.hi);
    else
      out.push_back(iv);
  }
  return out;
}

/// Maps a set of bad clock-to-Q values to the slacks that produce them.
/// A deferred readout behaves as q = P + d_nom.
inline std::vector<SlackInterval> q_to_slack(const ClockToQModel& m, const Real& P, const std::vector<QInterval>& qs) {
  const Real dn = m.d_nom, sf = m.delta_fail, c = m.c, tau = m.tau;
  const Real q_def = P + dn;
  std::vector<SlackInterval> s;
  bool defer_bad = false;
  for (const auto& q : qs) {
    if (q.lo <= q_def && q_def < q.hi) defer_bad = true;
    if (q.hi <= dn) continue;
    const Real lo = sf + c * exp(-(q.hi - dn) / tau);
    const Real hi = q.lo <= dn ? P : sf + c * exp(-(q.lo - dn) / tau);
    s.push_back({lo, hi});
  }
  if (defer_bad) s.push_back({Real(0), sf});
  return merge(std::move(s), P);
}

}  // namespace detail

/// Slack window at the last synchronizer DRO for which VALID and DATA split
/// across a read-cycle boundary.
inline DangerousWindow dangerous_window(const ClockToQModel& m, double period, double valid_path_delay,
                                        double data_path_delay, double clock_insertion = 0.0) {
  if (!(period > 0)) throw ConfigError("dangerous_window: period must be positive");
  DangerousWindow w;
  if (valid_path_delay == data_path_delay) return w;
  const Real P = period, L = clock_insertion;
  const Real early = std::min(valid_path_delay, data_path_delay);
  const Real late = std::max(valid_path_delay, data_path_delay);
  // Bad iff some boundary mP falls in (L+q+early, L+q+late].
  std::vector<detail::QInterval> qs;
  const Real cap = detail::q_cap(m);
  for (std::int64_t k = 1;; ++k) {
    const Real lo = P * k - L - late, hi = P * k - L - early;
    if (lo > cap) break;
    if (hi > 0) qs.push_back({lo, hi});
  }
  w.intervals = detail::q_to_slack(m, P, qs);
  return w;
}

/// Preimage of `w` (a window at stage i+1) through `k-1` further upstream
/// DRO stages, each feeding the next over `link_path`.
inline DangerousWindow propagate_window(const ClockToQModel& m, const DangerousWindow& w, double period, int k,
                                        double link_path) {
  if (k < 1) throw ConfigError("propagate_window: k must be >= 1");
  if (!(period > 0)) throw ConfigError("propagate_window: period must be positive");
  const Real P = period, J = link_path;
  const Real cap = detail::q_cap(m);
  DangerousWindow cur = w;
  for (int i = 1; i < k && !cur.empty(); ++i) {
    // Next-stage slack s' = nP − (q + J) for the first edge nP after arrival.
    std::vector<detail::QInterval> qs;
    for (const auto& iv : cur.intervals) {
      for (std::int64_t n = 1;; ++n) {
        const Real lo = P * n - J - iv.hi, hi = P * n - J - iv.lo;
        if (lo > cap) break;
        if (hi > 0) qs.push_back({lo, hi});
      }
    }
    cur.intervals = detail::q_to_slack(m, P, qs);
  }
  return cur;
}

inline DangerousWindow chain_window(const ClockToQModel& m, const SyncGeometry& g, int k) {
  return propagate_window(m, dangerous_window(m, g.period, g.valid_path, g.data_path, g.clock_insertion), g.period,
                          k, g.link_path);
}

inline Real ler_analytic_exact(const ClockToQModel& m, const SyncGeometry& g, int k) {
  return chain_window(m, g, k).width() / Real(g.period);
}

inline double ler_analytic(const ClockToQModel& m, const SyncGeometry& g, int k) {
  return static_cast<double>(ler_analytic_exact(m, g, k));
}

/// Pulse times produced by a k-DRO chain for a token arriving with slack s
/// before read edge 0 at the first DRO. Times are relative to the read-clock
/// source edge; cycle index = floor(t / P).
struct ChainOutcome {
  Real first_q;             // clock-to-Q of the first DRO (0 when deferred)
  bool first_deferred = false;
  Real valid_time, data_time;
  std::int64_t valid_cycle = 0, data_cycle = 0;
  bool mis_sync() const { return valid_cycle != data_cycle; }
};

inline ChainOutcome chain_outcome(const ClockToQModel& m, const SyncGeometry& g, const Real& slack, int k) {
  if (k < 1) throw ConfigError("chain_outcome: k must be >= 1");
  const Real P = g.period, dn = m.d_nom;
  ChainOutcome r;
  bool def = false;
  Real q = detail::q_of(m, slack, def);
  r.first_q = q;
  r.first_deferred = def;
  Real out = def ? P + dn : q;  // relative to edge 0 at the DRO pin
  for (int i = 1; i < k; ++i) {
    const Real arr = out + Real(g.link_path);
    const Real n = floor(arr / P) + 1;
    const Real s = n * P - arr;
    q = detail::q_of(m, s, def);
    out = n * P + (def ? P + dn : q);
  }
  r.valid_time = out + Real(g.clock_insertion) + Real(g.valid_path);
  r.data_time = out + Real(g.clock_insertion) + Real(g.data_path);
  r.valid_cycle = static_cast<std::int64_t>(floor(r.valid_time / P));
  r.data_cycle = static_cast<std::int64_t>(floor(r.data_time / P));
  return r;
}

}  // namespace sfq
