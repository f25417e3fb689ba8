#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace sfq;
using namespace testing_helpers;

namespace {
const Calibration cal;
}

// --- shift register -----------------------------------------------------------

TEST(ShiftRegisterFifo, EmptyFifoPassesTokenWithoutSend) {
  // Hand trace: C1 fires at S + jtl + c and clocks D1 one splitter later;
  // every further stage adds SPLA→SPLB→JF→C→SPLA = 2S + token + c.
  const auto& d = cal.delay;
  const SimTime S = d.splitter, c = d.c, J = d.jtl, F = d.token_jtl, q = SimTime::ps(8.1);
  for (int N = 1; N <= 5; ++N) {
    const FifoDesign fd = build_shift_register_fifo(N, cal);
    Simulator sim(fd.netlist);
    const Trace& tr = sim.run_until(ps(500));
    const SimTime T1 = S + J + c + S;
    const SimTime TN = T1 + (S + S + F + c) * (N - 1);
    EXPECT_EQ(tr["DATA_OUT"], std::vector<SimTime>{TN + q + J}) << N;
    EXPECT_EQ(tr["VALID_OUT"], std::vector<SimTime>{TN + S + F}) << N;
    EXPECT_EQ(tr["WRITE_ACK"], std::vector<SimTime>{T1 + S + J}) << N;
    EXPECT_EQ(sim.stats().protocol_violations, 0u);
  }
}

TEST(ShiftRegisterFifo, SingleStageReleasesOneTokenPerSend) {
  BuildOptions bo;
  bo.writes = {ps(0), ps(50)};
  const FifoDesign fd = build_shift_register_fifo(1, cal, bo, {ps(200)});
  EXPECT_EQ(fd.netlist.count(CellKind::DottedCElement), 1u);
  EXPECT_EQ(fd.netlist.count(CellKind::Dro), 1u);
  Simulator sim(fd.netlist);
  sim.run_until(ps(150));
  EXPECT_EQ(sim.trace()["DATA_OUT"].size(), 1u);  // second token waits for SEND
  sim.run_until(ps(400));
  ASSERT_EQ(sim.trace()["DATA_OUT"].size(), 2u);
  EXPECT_GT(sim.trace()["DATA_OUT"][1], ps(200));
}

TEST(ShiftRegisterFifo, TwoTokensThreeSends) {
  BuildOptions bo;
  bo.writes = {ps(0), ps(60)};
  const FifoDesign fd = build_shift_register_fifo(3, cal, bo, {ps(300), ps(400), ps(500)});
  Simulator sim(fd.netlist);
  const Trace& tr = sim.run_until(ps(800));
  EXPECT_EQ(tr["DATA_OUT"].size(), 2u);
  EXPECT_EQ(tr["VALID_OUT"].size(), 2u);
  EXPECT_EQ(tr["WRITE_ACK"].size(), 2u);
}

TEST(ShiftRegisterFifo, RejectsZeroStages) { EXPECT_THROW(build_shift_register_fifo(0), ConfigError); }

// --- CDC designs ----------------------------------------------------------------

TEST(CdcFifo, CellInventory) {
  for (int N = 2; N <= 8; ++N)
    for (int k = 1; k <= 4; ++k) {
      const auto nl = build_qcdc(N, k).netlist;
      EXPECT_EQ(nl.count(CellKind::Dro), static_cast<std::size_t>(N - 2 + k + 1));
      EXPECT_EQ(nl.count(CellKind::DottedCElement), static_cast<std::size_t>(N - 2));
      EXPECT_EQ(nl.count(CellKind::ClockGen), 1u);
      EXPECT_NO_THROW(nl.validate());
    }
}

TEST(CdcFifo, SingleSyncDroIsTheBaseline) {
  for (int N : {2, 3, 10}) EXPECT_EQ(build_qcdc(N, 1).netlist, build_baseline_cdc(N).netlist);
}

TEST(CdcFifo, RejectsBadShapes) {
  EXPECT_THROW(build_baseline_cdc(1), ConfigError);
  EXPECT_THROW(build_qcdc(1, 2), ConfigError);
  EXPECT_THROW(build_qcdc(4, 0), ConfigError);
}

TEST(CdcFifo, WellSeparatedTokensAllSynchronize) {
  BuildOptions bo;
  bo.writes.clear();
  for (int i = 0; i < 6; ++i) bo.writes.push_back(ps(5 + 200.0 * i));
  for (int N : {2, 5}) {
    const FifoDesign fd = build_baseline_cdc(N, cal, bo);
    Simulator sim(fd.netlist);
    const Trace& tr = sim.run_until(ps(1500));
    ASSERT_EQ(tr["DATA_OUT"].size(), 6u);
    ASSERT_EQ(tr["VALID_OUT"].size(), 6u);
    const ReadClock rc{bo.read_period, bo.read_phase};
    for (int i = 0; i < 6; ++i) EXPECT_EQ(rc.cycle_of(tr["VALID_OUT"][i]), rc.cycle_of(tr["DATA_OUT"][i]));
    EXPECT_EQ(sim.stats().protocol_violations, 0u);
  }
}

TEST(CdcFifo, BurstDrainsInOrderWithoutViolations) {
  BuildOptions bo;
  bo.writes.clear();
  for (int i = 0; i < 4; ++i) bo.writes.push_back(ps(60.0 * i));
  const FifoDesign fd = build_qcdc(6, 2, cal, bo);
  SimOptions o;
  o.fatal_protocol_violations = true;
  Simulator sim(fd.netlist, o);
  const Trace& tr = sim.run_until(ps(2000));
  EXPECT_EQ(tr["DATA_OUT"].size(), 4u);
  EXPECT_EQ(tr["WRITE_ACK"].size(), 4u);
}

TEST(CdcFifo, BaselineTableSlacksAtThirtyGigahertz) {
  CdcHarness h({DesignKind::Baseline, 10, 1}, cal, period_from_ghz(30.0));
  EXPECT_EQ(h.run_slack(0.5).outcome.classification, Classification::MisSync);
  const auto late = h.run_slack(0.1);
  EXPECT_EQ(late.outcome.classification, Classification::SyncLate);
  EXPECT_TRUE(late.first_sync->deferred);
}

TEST(CdcFifo, QcdcHalfPicosecondAtThirtyGigahertz) {
  CdcHarness h({DesignKind::Qcdc, 10, 2}, cal, period_from_ghz(30.0));
  const auto r = h.run_slack(0.5);
  ASSERT_TRUE(r.outcome.valid_cycle && r.outcome.data_cycle);
  EXPECT_EQ(*r.outcome.valid_cycle, *r.outcome.data_cycle);
  EXPECT_TRUE(r.outcome.works());
}

TEST(CdcFifo, QcdcAddsExactlyOneReadPeriodOfLatency) {
  for (double ghz : {30.0, 50.0})
    for (int N : {2, 4, 10}) {
      CdcHarness b({DesignKind::Baseline, N, 1}, cal, period_from_ghz(ghz));
      CdcHarness q({DesignKind::Qcdc, N, 2}, cal, period_from_ghz(ghz));
      for (double s : {2.0, 5.0, 9.0}) {
        const auto rb = b.run_slack(s), rq = q.run_slack(s);
        ASSERT_EQ(rb.data.size(), 1u);
        ASSERT_EQ(rq.data.size(), 1u);
        EXPECT_EQ(rq.data[0] - rb.data[0], period_from_ghz(ghz)) << ghz << " GHz N=" << N << " s=" << s;
        EXPECT_EQ(rq.valid[0] - rb.valid[0], period_from_ghz(ghz));
      }
    }
}

// --- JJ count and area ----------------------------------------------------------

TEST(Area, JjCountsPerKind) {
  Netlist nl;
  nl.add("C", CellKind::CElement, ps(1));
  testing_helpers::dro(nl, "D", cal.dro);
  nl.add("S", CellKind::Splitter, ps(1));
  EXPECT_EQ(jj_count(nl), 12);
  EXPECT_EQ(jj_count(Netlist{}), 0);
  nl.add("J", CellKind::Jtl, ps(1));
  EXPECT_EQ(jj_count(nl), 14);
  EXPECT_EQ(jj_count(nl, 4), 16);
}

TEST(Area, SynchronizerJjDeltaIsConstant) {
  const long d2 = jj_count(build_qcdc(2, 2).netlist) - jj_count(build_baseline_cdc(2).netlist);
  EXPECT_GT(d2, 0);
  for (int N = 3; N <= 30; ++N)
    EXPECT_EQ(jj_count(build_qcdc(N, 2).netlist) - jj_count(build_baseline_cdc(N).netlist), d2);
}

TEST(Area, ReproducesPublishedTable) {
  const struct {
    int n;
    double base, prop;
  } rows[] = {{2, 37.4, 56.52}, {5, 118.04, 137.16}, {10, 255.04, 274.16}, {20, 523.84, 542.96}};
  for (const auto& r : rows) {
    const double b = area(build_baseline_cdc(r.n).netlist, cal.area).area;
    const double p = area(build_qcdc(r.n, 2).netlist, cal.area).area;
    EXPECT_NEAR(b / r.base, 1.0, 0.005) << r.n;
    EXPECT_NEAR(p / r.prop, 1.0, 0.005) << r.n;
    EXPECT_NEAR(p - b, 19.12, 1e-9) << r.n;
  }
  const double ratio = area(build_qcdc(10, 2).netlist, cal.area).area / area(build_baseline_cdc(10).netlist, cal.area).area;
  EXPECT_NEAR(ratio, 1.075, 0.001);
}

TEST(Area, BreakdownIsAdditive) {
  const auto r = area(build_qcdc(7, 3).netlist, cal.area);
  long jj = 0, cells = 0;
  double a = 0;
  for (const auto& [k, line] : r.by_kind) jj += line.jjs, cells += line.cells, a += line.area;
  EXPECT_EQ(jj, r.jj_count);
  EXPECT_EQ(cells, static_cast<long>(build_qcdc(7, 3).netlist.cells.size()));
  EXPECT_DOUBLE_EQ(a, r.area);
}

TEST(Area, MissingKindIsAnError) {
  AreaTable t = cal.area;
  t.per_cell.erase(CellKind::Dro);
  EXPECT_THROW(area(build_baseline_cdc(2).netlist, t), ConfigError);
}
