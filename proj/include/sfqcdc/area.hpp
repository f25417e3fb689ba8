#pragma once

#include <map>
#include <string>

#include "calibration.hpp"
#include "netlist.hpp"

namespace sfq {

inline int jj_per_cell(CellKind k, int jtl_jj = 2) {
  switch (k) {
    case CellKind::CElement:
    case CellKind::DottedCElement: return 3;
    case CellKind::Dro: return 6;
    case CellKind::Splitter: return 3;
    case CellKind::Jtl: return jtl_jj;
    default: return 0;
  }
}

inline long jj_count(const Netlist& nl, int jtl_jj = 2) {
  long n = 0;
  for (const auto& c : nl.cells) n += jj_per_cell(c.kind, jtl_jj);
  return n;
}

struct AreaReport {
  long jj_count = 0;
  double area = 0;  // μm²
  struct Line {
    long cells = 0;
    long jjs = 0;
    double area = 0;
  };
  std::map<CellKind, Line> by_kind;
};

inline AreaReport area(const Netlist& nl, const AreaTable& table = {}) {
  AreaReport r;
  for (const auto& c : nl.cells) {
    auto it = table.per_cell.find(c.kind);
    if (it == table.per_cell.end())
      throw ConfigError("area table has no entry for cell kind '" + std::string(kind_name(c.kind)) + "'");
    auto& line = r.by_kind[c.kind];
    const int jj = jj_per_cell(c.kind, table.jtl_jj);
    ++line.cells;
    line.jjs += jj;
    line.area += it->second;
    r.jj_count += jj;
  }
  // Sum per kind in a fixed order so the total does not depend on cell order.
  for (const auto& [k, line] : r.by_kind) r.area += line.area;
  return r;
}

}  // namespace sfq
