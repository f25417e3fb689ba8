#pragma once

// Generators for the three FIFO designs.
//
// Handshake stage j (shared by all three):
//
//   token ──► Cj.b      Cj: dotted C-element, port a = "downstream is free"
//   free  ──► Cj.a      (pre-armed, so an empty FIFO accepts its first token)
//   Cj.out ─► SPLAj ─┬► Dj.clk         (shift the data DRO)
//                    └► SPLBj ─┬► JFj  (token forward, next stage's b)
//                              └► JBj  (acknowledge, previous stage's a)
//   Dj.q ──► JDj ──► next data DRO
//
// CDC designs append N−2 such stages, then the read-clocked sync DRO chain
// X1..Xk and the output pair:
//
//   Xk.q ─► SPL_O ─┬► J_V ─► VALID_OUT
//                  └► DD.clk;  DD.q ─► SPL_D ─┬► DATA_OUT
//                                             └► ack to the last stage
//
// so VALID = Q + splitter + JTL and DATA = Q + splitter + clk→Q + splitter.

#include <string>
#include <vector>

#include "calibration.hpp"
#include "netlist.hpp"
#include "window.hpp"

namespace sfq {

enum class DesignKind { ShiftRegister, Baseline, Qcdc };

struct BuildOptions {
  SimTime read_period = period_from_ghz(30.0);
  SimTime read_phase{};
  std::vector<SimTime> writes = {SimTime{}};  // DATA_IN pulse times
};

struct FifoDesign {
  DesignKind kind{};
  int stages = 0;
  int sync_depth = 0;
  Netlist netlist;
  std::string sync_data_driver;  // net feeding X1.d (pilot runs probe it)
  SimTime first_sync_insertion;  // READ_CLK → X1.clk
  SyncGeometry geometry;         // ps, for the analytic windows
};

namespace detail {

inline std::string nm(const char* base, int i) { return base + std::to_string(i); }

inline void add_source(Netlist& nl, const std::string& name, std::vector<SimTime> times) {
  CellSpec c;
  c.name = name;
  c.kind = CellKind::Source;
  c.times = std::move(times);
  nl.add(std::move(c));
}

inline void add_probe(Netlist& nl, const std::string& name) { nl.add(name, CellKind::Probe); }

inline void add_dro(Netlist& nl, const std::string& name, const ClockToQModel& m) {
  CellSpec c;
  c.name = name;
  c.kind = CellKind::Dro;
  c.model = m;
  nl.add(std::move(c));
}

/// Stages first..last (inclusive). Wires everything internal to the chain;
/// returns nothing, the caller connects JF_last, JD_last, C_last.a, JB_first.
inline void add_stages(Netlist& nl, const Calibration& cal, int first, int last) {
  const auto& d = cal.delay;
  for (int j = first; j <= last; ++j) {
    nl.add(nm("C", j), CellKind::DottedCElement, d.c);
    add_dro(nl, nm("D", j), cal.dro);
    nl.add(nm("SPLA", j), CellKind::Splitter, d.splitter);
    nl.add(nm("SPLB", j), CellKind::Splitter, d.splitter);
    nl.add(nm("JF", j), CellKind::Jtl, d.token_jtl);
    nl.add(nm("JB", j), CellKind::Jtl, d.jtl);
    nl.add(nm("JD", j), CellKind::Jtl, d.jtl);
    nl.connect(nm("C", j) + ".out", {nm("SPLA", j) + ".in"});
    nl.connect(nm("SPLA", j) + ".out0", {nm("D", j) + ".clk"});
    nl.connect(nm("SPLA", j) + ".out1", {nm("SPLB", j) + ".in"});
    nl.connect(nm("SPLB", j) + ".out0", {nm("JF", j) + ".in"});
    nl.connect(nm("SPLB", j) + ".out1", {nm("JB", j) + ".in"});
    nl.connect(nm("D", j) + ".q", {nm("JD", j) + ".in"});
    if (j > first) {
      nl.connect(nm("JF", j - 1) + ".out", {nm("C", j) + ".b"});
      nl.connect(nm("JD", j - 1) + ".out", {nm("D", j) + ".d"});
      nl.connect(nm("JB", j) + ".out", {nm("C", j - 1) + ".a"});
    }
  }
}

inline void add_read_clock(Netlist& nl, const BuildOptions& o) {
  CellSpec c;
  c.name = "READ_CLK";
  c.kind = CellKind::ClockGen;
  c.period = o.read_period;
  c.phase = o.read_phase;
  nl.add(std::move(c));
}

}  // namespace detail

/// Geometry of the sync chain as seen by the analytic window code.
inline SyncGeometry sync_geometry(const Calibration& cal, SimTime period) {
  const auto& d = cal.delay;
  SyncGeometry g;
  g.period = period.to_ps();
  g.clock_insertion = d.clock_leaf.to_ps();
  g.valid_path = (d.splitter + d.valid_jtl).to_ps();
  g.data_path = (d.splitter + SimTime::ps(cal.dro.d_nom) + d.splitter).to_ps();
  g.link_path = d.sync_link.to_ps();
  return g;
}

/// Handshake shift-register FIFO: DATA_IN → N stages → DATA_OUT, with the
/// token copy on VALID_OUT; the last stage waits for SEND_IN pulses.
inline FifoDesign build_shift_register_fifo(int N, const Calibration& cal = {}, const BuildOptions& o = {},
                                            std::vector<SimTime> sends = {}) {
  if (N < 1) throw ConfigError("shift-register FIFO needs N >= 1");
  FifoDesign fd;
  fd.kind = DesignKind::ShiftRegister;
  fd.stages = N;
  auto& nl = fd.netlist;
  const auto& d = cal.delay;
  detail::add_source(nl, "DATA_IN", o.writes);
  detail::add_source(nl, "SEND_IN", std::move(sends));
  nl.add("SPL_IN", CellKind::Splitter, d.splitter);
  nl.add("J_IN", CellKind::Jtl, d.jtl);
  detail::add_stages(nl, cal, 1, N);
  detail::add_probe(nl, "DATA_OUT");
  detail::add_probe(nl, "VALID_OUT");
  detail::add_probe(nl, "WRITE_ACK");
  nl.connect("DATA_IN.out", {"SPL_IN.in"});
  nl.connect("SPL_IN.out0", {"D1.d"});
  nl.connect("SPL_IN.out1", {"J_IN.in"});
  nl.connect("J_IN.out", {"C1.b"});
  nl.connect("SEND_IN.out", {detail::nm("C", N) + ".a"});
  nl.connect(detail::nm("JD", N) + ".out", {"DATA_OUT.in"});
  nl.connect(detail::nm("JF", N) + ".out", {"VALID_OUT.in"});
  nl.connect("JB1.out", {"WRITE_ACK.in"});
  nl.validate();
  return fd;
}

/// CDC FIFO with k read-clocked sync DROs; k = 1 is the baseline design.
inline FifoDesign build_qcdc(int N, int k, const Calibration& cal = {}, const BuildOptions& o = {}) {
  if (N < 2) throw ConfigError("CDC FIFO needs N >= 2");
  if (k < 1) throw ConfigError("CDC FIFO needs k >= 1 synchronizer DROs");
  const auto& d = cal.delay;
  if (k > 1 && d.clock_leaf <= d.splitter) throw ConfigError("clock leaf delay must exceed the splitter delay");

  FifoDesign fd;
  fd.kind = k == 1 ? DesignKind::Baseline : DesignKind::Qcdc;
  fd.stages = N;
  fd.sync_depth = k;
  fd.geometry = sync_geometry(cal, o.read_period);
  auto& nl = fd.netlist;
  using detail::nm;
  const int M = N - 2;

  detail::add_source(nl, "DATA_IN", o.writes);
  detail::add_read_clock(nl, o);
  nl.add("SPL_IN", CellKind::Splitter, d.splitter);
  nl.add("J_IN", CellKind::Jtl, d.jtl);
  detail::add_stages(nl, cal, 1, M);

  // Sync DROs, their clock leaves, and the links between them.
  std::vector<int> depth(k + 1, 0);  // splitters between READ_CLK and leaf i
  for (int i = 1; i <= k; ++i) {
    detail::add_dro(nl, nm("X", i), cal.dro);
    if (k == 1) break;
    depth[i] = (i == 1) ? k - 1 : k - i + 1;
  }
  for (int i = 1; i <= k; ++i)
    nl.add(nm("CK", i), CellKind::Jtl, k == 1 ? d.clock_leaf : d.clock_leaf - d.splitter);
  fd.first_sync_insertion = k == 1 ? d.clock_leaf : d.splitter * depth[1] + (d.clock_leaf - d.splitter);
  for (int i = 1; i < k; ++i) {
    // Fold leaf skew into the link so every stage sees the same geometry.
    const auto skew_next = d.splitter * depth[i + 1], skew_here = d.splitter * depth[i];
    const SimTime link = d.sync_link + skew_next - skew_here;
    nl.add(nm("LNK", i), CellKind::Jtl, link);
    nl.add(nm("SCK", i), CellKind::Splitter, d.splitter);
  }
  nl.add("SPL_O", CellKind::Splitter, d.splitter);
  nl.add("J_V", CellKind::Jtl, d.valid_jtl);
  detail::add_dro(nl, "DD", cal.dro);
  nl.add("SPL_D", CellKind::Splitter, d.splitter);
  detail::add_probe(nl, "VALID_OUT");
  detail::add_probe(nl, "DATA_OUT");
  detail::add_probe(nl, "WRITE_ACK");

  // Write side.
  nl.connect("DATA_IN.out", {"SPL_IN.in"});
  if (M >= 1) {
    nl.connect("SPL_IN.out0", {"D1.d"});
    nl.connect("SPL_IN.out1", {"J_IN.in"});
    nl.connect("J_IN.out", {"C1.b"});
    nl.connect("JB1.out", {"WRITE_ACK.in"});
    nl.connect(nm("JD", M) + ".out", {"X1.d"});
    nl.connect(nm("JF", M) + ".out", {"DD.d"});
    nl.connect("SPL_D.out1", {nm("C", M) + ".a"});
    fd.sync_data_driver = nm("JD", M) + ".out";
  } else {
    nl.connect("SPL_IN.out0", {"J_IN.in"});
    nl.connect("J_IN.out", {"X1.d"});
    nl.connect("SPL_IN.out1", {"DD.d"});
    nl.connect("SPL_D.out1", {"WRITE_ACK.in"});
    fd.sync_data_driver = "J_IN.out";
  }

  // Read clock tree: X_k hangs off the first splitter, X_1 off the last.
  if (k == 1) {
    nl.connect("READ_CLK.out", {"CK1.in"});
  } else {
    nl.connect("READ_CLK.out", {"SCK1.in"});
    for (int j = 1; j < k; ++j) {
      nl.connect(nm("SCK", j) + ".out0", {nm("CK", k - j + 1) + ".in"});
      if (j + 1 < k) nl.connect(nm("SCK", j) + ".out1", {nm("SCK", j + 1) + ".in"});
    }
    nl.connect(nm("SCK", k - 1) + ".out1", {"CK1.in"});
  }
  for (int i = 1; i <= k; ++i) nl.connect(nm("CK", i) + ".out", {nm("X", i) + ".clk"});
  for (int i = 1; i < k; ++i) {
    nl.connect(nm("X", i) + ".q", {nm("LNK", i) + ".in"});
    nl.connect(nm("LNK", i) + ".out", {nm("X", i + 1) + ".d"});
  }

  // Read side.
  nl.connect(nm("X", k) + ".q", {"SPL_O.in"});
  nl.connect("SPL_O.out0", {"J_V.in"});
  nl.connect("J_V.out", {"VALID_OUT.in"});
  nl.connect("SPL_O.out1", {"DD.clk"});
  nl.connect("DD.q", {"SPL_D.in"});
  nl.connect("SPL_D.out0", {"DATA_OUT.in"});
  nl.validate();
  return fd;
}

inline FifoDesign build_baseline_cdc(int N, const Calibration& cal = {}, const BuildOptions& o = {}) {
  return build_qcdc(N, 1, cal, o);
}

}  // namespace sfq
