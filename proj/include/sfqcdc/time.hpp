#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sfq {

/// Simulation time as an integer tick count. One tick is one attosecond, so
/// 1 fs = 1000 ticks and 1 ps = 10^6 ticks; int64 covers ~9.2 s.
///
/// The resolution is finer than the delays anyone quotes because calibrated
/// dangerous windows are only a few femtoseconds wide; a coarser lattice
/// would dominate the Monte Carlo LER error.
class SimTime {
 public:
  using rep = std::int64_t;
  static constexpr rep ticks_per_fs = 1000;
  static constexpr rep ticks_per_ps = 1000 * ticks_per_fs;

  constexpr SimTime() = default;

  static constexpr SimTime ticks(rep v) {
    if (v < 0) throw std::domain_error("SimTime: negative time");
    SimTime t;
    t.v_ = v;
    return t;
  }
  static constexpr SimTime fs(rep v) { return ticks(checked_mul(v, ticks_per_fs)); }

  /// Rounds to the nearest tick.
  static SimTime ps(double v) {
    const double f = std::round(v * static_cast<double>(ticks_per_ps));
    if (!(f >= 0.0) || f >= 9.2e18) throw std::domain_error("SimTime: picosecond value out of range");
    return ticks(static_cast<rep>(f));
  }

  static constexpr SimTime max() { return ticks(std::numeric_limits<rep>::max()); }

  constexpr rep count() const { return v_; }
  constexpr double to_ps() const { return static_cast<double>(v_) / static_cast<double>(ticks_per_ps); }
  constexpr double to_fs() const { return static_cast<double>(v_) / static_cast<double>(ticks_per_fs); }

  /// Exact decimal femtoseconds, e.g. "33333.333".
  std::string fs_string() const { return decimal(ticks_per_fs); }
  /// Exact decimal picoseconds, e.g. "1.54".
  std::string ps_string() const { return decimal(ticks_per_ps); }

  /// Parses a non-negative decimal picosecond literal exactly ("1.54",
  /// "33.333333"). More fractional digits than the tick resolution is an error.
  static SimTime parse_ps(std::string_view s) {
    if (s.empty()) throw std::invalid_argument("empty time literal");
    rep whole = 0, frac = 0, scale = ticks_per_ps;
    bool dot = false, digits = false;
    for (char ch : s) {
      if (ch == '.' && !dot) {
        dot = true;
        continue;
      }
      if (ch < '0' || ch > '9') throw std::invalid_argument("bad time literal '" + std::string(s) + "'");
      digits = true;
      const rep d = ch - '0';
      if (!dot) {
        whole = checked_mul(whole, 10);
        if (__builtin_add_overflow(whole, d, &whole)) throw std::overflow_error("SimTime overflow");
      } else {
        scale /= 10;
        if (scale == 0) {
          if (d != 0) throw std::invalid_argument("time literal '" + std::string(s) + "' is finer than 1 as");
          scale = 0;
          continue;
        }
        frac += d * scale;
      }
    }
    if (!digits) throw std::invalid_argument("bad time literal '" + std::string(s) + "'");
    return ticks(checked_mul(whole, ticks_per_ps)) + ticks(frac);
  }

  friend constexpr SimTime operator+(SimTime a, SimTime b) {
    rep r{};
    if (__builtin_add_overflow(a.v_, b.v_, &r)) throw std::overflow_error("SimTime overflow");
    return ticks(r);
  }
  constexpr SimTime& operator+=(SimTime o) { return *this = *this + o; }

  friend constexpr SimTime operator-(SimTime a, SimTime b) {
    if (b.v_ > a.v_) throw std::domain_error("SimTime: negative difference");
    return ticks(a.v_ - b.v_);
  }

  friend constexpr SimTime operator*(SimTime a, rep k) {
    if (k < 0) throw std::domain_error("SimTime: negative multiplier");
    return ticks(checked_mul(a.v_, k));
  }

  friend constexpr auto operator<=>(SimTime, SimTime) = default;

  friend std::ostream& operator<<(std::ostream& os, SimTime t) { return os << t.fs_string() << "fs"; }

 private:
  std::string decimal(rep unit) const {
    std::string s = std::to_string(v_ / unit);
    rep frac = v_ % unit;
    if (frac != 0) {
      int width = 0;
      for (rep u = unit; u > 1; u /= 10) ++width;
      std::string f = std::to_string(frac);
      f.insert(0, static_cast<std::size_t>(width) - f.size(), '0');
      while (f.back() == '0') f.pop_back();
      s += '.' + f;
    }
    return s;
  }

  static constexpr rep checked_mul(rep a, rep b) {
    rep r{};
    if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("SimTime overflow");
    return r;
  }

  rep v_ = 0;
};

/// Period of a clock given in GHz, rounded to the nearest tick.
inline SimTime period_from_ghz(double ghz) {
  if (!(ghz > 0.0) || !std::isfinite(ghz)) throw std::domain_error("frequency must be positive");
  return SimTime::ps(1000.0 / ghz);
}

}  // namespace sfq
