#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"

namespace sfq {

/// Clock-to-Q delay of a DRO as a function of setup slack Δ (all in ps):
///
///     q(Δ) = max(d_nom, d_nom + τ·ln(c / (Δ − Δ_fail)))   for Δ > Δ_fail
///     q(Δ) = Deferred                                      for Δ ≤ Δ_fail
///
/// The law meets d_nom at Δ_sat = Δ_fail + c and diverges at Δ_fail.
struct ClockToQModel {
  double d_nom = 8.1;
  double delta_fail = 1.7;
  double tau = 1.0;
  double c = 1.0;

  /// nullopt means the readout defers to the next clock edge.
  std::optional<double> clock_to_q(double delta) const {
    if (!(delta > delta_fail)) return std::nullopt;
    const double x = delta - delta_fail;
    if (x >= c) return d_nom;
    return std::max(d_nom, d_nom + tau * std::log(c / x));
  }

  double delta_sat() const { return delta_fail + c; }

  /// Slack at which the delay is 10% above nominal.
  double delta_setup() const { return slack_for_delay(1.1 * d_nom); }

  /// Inverse on the divergent branch: the slack whose delay is q (q > d_nom).
  double slack_for_delay(double q) const { return delta_fail + c * std::exp(-(q - d_nom) / tau); }

  void validate() const {
    if (!(d_nom > 0) || !(tau > 0) || !(c > 0) || !std::isfinite(delta_fail))
      throw ConfigError("clock-to-q model: d_nom, tau and c must be positive");
  }
};

struct Anchor {
  double delta;  // ps
  double delay;  // ps
};

/// Solves the divergence law for (τ, c) through the given anchors: exactly
/// for two, ordinary least squares for more. The law is linear in
/// (A = τ·ln c, τ):  delay − d_nom = A − τ·ln(Δ − Δ_fail).
inline ClockToQModel fit_from_anchors(std::vector<Anchor> anchors, double delta_fail, double d_nom) {
  if (anchors.size() < 2) throw ConfigError("fit_from_anchors: need at least two anchors");
  std::sort(anchors.begin(), anchors.end(), [](const Anchor& a, const Anchor& b) { return a.delta < b.delta; });
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    const auto& a = anchors[i];
    if (!(a.delta > delta_fail)) throw ConfigError("fit_from_anchors: anchor slack must exceed delta_fail");
    if (!(a.delay > d_nom)) throw ConfigError("fit_from_anchors: anchor delay must exceed d_nom");
    if (i > 0) {
      if (a.delta == anchors[i - 1].delta) throw ConfigError("fit_from_anchors: duplicate anchor slack");
      if (!(a.delay < anchors[i - 1].delay))
        throw ConfigError("fit_from_anchors: anchors violate monotonicity (delay must fall as slack grows)");
    }
  }

  double A = 0, tau = 0;
  if (anchors.size() == 2) {
    const double u0 = -std::log(anchors[0].delta - delta_fail), y0 = anchors[0].delay - d_nom;
    const double u1 = -std::log(anchors[1].delta - delta_fail), y1 = anchors[1].delay - d_nom;
    tau = (y0 - y1) / (u0 - u1);
    A = y0 - tau * u0;
  } else {
    double su = 0, sy = 0, suu = 0, suy = 0;
    const double n = static_cast<double>(anchors.size());
    for (const auto& a : anchors) {
      const double u = -std::log(a.delta - delta_fail), y = a.delay - d_nom;
      su += u, sy += y, suu += u * u, suy += u * y;
    }
    tau = (n * suy - su * sy) / (n * suu - su * su);
    A = (sy - tau * su) / n;
  }
  if (!(tau > 0) || !std::isfinite(tau))
    throw ConfigError("fit_from_anchors: fitted law is not monotone (tau <= 0)");

  ClockToQModel m;
  m.d_nom = d_nom;
  m.delta_fail = delta_fail;
  m.tau = tau;
  m.c = std::exp(A / tau);
  m.validate();
  return m;
}

}  // namespace sfq
