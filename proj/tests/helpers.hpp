#pragma once

#include <string>
#include <vector>

#include "sfqcdc/sfqcdc.hpp"

namespace testing_helpers {

inline sfq::SimTime ps(double v) { return sfq::SimTime::ps(v); }

inline void source(sfq::Netlist& nl, const std::string& name, std::vector<sfq::SimTime> at = {}) {
  sfq::CellSpec c;
  c.name = name;
  c.kind = sfq::CellKind::Source;
  c.times = std::move(at);
  nl.add(std::move(c));
}

inline void clock(sfq::Netlist& nl, const std::string& name, sfq::SimTime period, sfq::SimTime phase = {}) {
  sfq::CellSpec c;
  c.name = name;
  c.kind = sfq::CellKind::ClockGen;
  c.period = period;
  c.phase = phase;
  nl.add(std::move(c));
}

inline void dro(sfq::Netlist& nl, const std::string& name, const sfq::ClockToQModel& m) {
  sfq::CellSpec c;
  c.name = name;
  c.kind = sfq::CellKind::Dro;
  c.model = m;
  nl.add(std::move(c));
}

/// Ascending pulse times on a 1 fs grid, at least `gap` apart.
template <class Rng>
std::vector<sfq::SimTime> random_schedule(Rng& rng, int n, sfq::SimTime gap, sfq::SimTime spread) {
  std::vector<sfq::SimTime> t;
  sfq::SimTime cur = sfq::SimTime::fs(static_cast<long>(rng.below(spread.count() / 1000)));
  for (int i = 0; i < n; ++i) {
    t.push_back(cur);
    cur += gap + sfq::SimTime::fs(static_cast<long>(rng.below(spread.count() / 1000)));
  }
  return t;
}

}  // namespace testing_helpers
