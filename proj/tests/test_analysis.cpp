#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "helpers.hpp"

using namespace sfq;

namespace {

const Calibration cal;

Trace make_trace(std::vector<SimTime> valid, std::vector<SimTime> data) {
  Trace tr;
  const auto v = tr.add_slot("VALID_OUT"), d = tr.add_slot("DATA_OUT");
  for (auto t : valid) tr.record(v, t);
  for (auto t : data) tr.record(d, t);
  return tr;
}

// VALID and DATA paths made equal: no slack can split them.
Calibration equal_paths() {
  Calibration c;
  c.delay.valid_jtl = c.delay.splitter + SimTime::ps(c.dro.d_nom);
  return c;
}

}  // namespace

// --- classification -------------------------------------------------------------

TEST(Classify, CycleExamples) {
  EXPECT_EQ(classify_cycles(4, 4, 4), Classification::SyncSameCycle);
  EXPECT_EQ(classify_cycles(4, 5, 4), Classification::MisSync);
  EXPECT_EQ(classify_cycles(5, 4, 4), Classification::MisSync);
  EXPECT_EQ(classify_cycles(5, 5, 4), Classification::SyncLate);
  EXPECT_EQ(classify_cycles(std::nullopt, 5, 4), Classification::Lost);
  EXPECT_EQ(classify_cycles(5, std::nullopt, 4), Classification::Lost);
}

TEST(Classify, FromTraceUsesReadClockPhase) {
  const ReadClock rc{SimTime::ps(20), SimTime::ps(3)};
  EXPECT_EQ(rc.cycle_of(SimTime::ps(3)), 0);
  EXPECT_EQ(rc.cycle_of(SimTime::ps(22.999)), 0);
  EXPECT_EQ(rc.cycle_of(SimTime::ps(23)), 1);
  EXPECT_EQ(rc.cycle_of(SimTime::ps(1)), -1);
  const auto o = classify_transfer(make_trace({SimTime::ps(84)}, {SimTime::ps(90)}), rc, 4);
  EXPECT_EQ(*o.valid_cycle, 4);
  EXPECT_EQ(o.classification, Classification::SyncSameCycle);
  const auto m = classify_transfer(make_trace({SimTime::ps(84)}, {SimTime::ps(104)}), rc, 4);
  EXPECT_EQ(m.classification, Classification::MisSync);
  EXPECT_TRUE(m.valid_early());
  EXPECT_EQ(classify_transfer(make_trace({}, {SimTime::ps(90)}), rc, 4).classification, Classification::Lost);
}

TEST(Classify, TwoPulsesInOneCycleIsAViolation) {
  const ReadClock rc{SimTime::ps(20), SimTime{}};
  EXPECT_THROW(classify_transfer(make_trace({SimTime::ps(1), SimTime::ps(2)}, {SimTime::ps(3)}), rc, 0),
               ProtocolViolation);
  EXPECT_THROW(classify_transfer(Trace{}, rc, 0), ConfigError);
}

// --- statistics -----------------------------------------------------------------

TEST(Wilson, KnownValuesAndContainment) {
  const auto w = wilson(10, 100);
  EXPECT_NEAR(w.lo, 0.0552, 1e-4);
  EXPECT_NEAR(w.hi, 0.1744, 1e-4);
  EXPECT_EQ(wilson(0, 1000).lo, 0.0);
  EXPECT_GT(wilson(0, 1000).hi, 0.0);
  EXPECT_EQ(wilson(1000, 1000).hi, 1.0);
  SplitMix64 rng(5);
  for (int i = 0; i < 10000; ++i) {
    const std::uint64_t n = 1 + rng.below(1'000'000), f = rng.below(n + 1);
    const auto ci = wilson(f, n);
    const double p = static_cast<double>(f) / static_cast<double>(n);
    ASSERT_LE(ci.lo, p + 1e-15);
    ASSERT_GE(ci.hi, p - 1e-15);
    ASSERT_GE(ci.lo, 0.0);
    ASSERT_LE(ci.hi, 1.0);
  }
}

TEST(Mtbf, Examples) {
  EXPECT_NEAR(mtbf(1e-3, 30e9), 1.0 / 3e7, 1e-15);
  EXPECT_TRUE(std::isinf(mtbf(0, 30e9)));
  EXPECT_THROW(mtbf(1e-3, 0), ConfigError);
  EXPECT_THROW(mtbf(2, 1), ConfigError);
  const auto g = sync_geometry(cal, period_from_ghz(30.0));
  const double rate = 30e9;
  EXPECT_GE(mtbf(ler_analytic(cal.dro, g, 2), rate), 1000 * mtbf(ler_analytic(cal.dro, g, 1), rate));
}

// --- depth sizing ---------------------------------------------------------------

TEST(Depth, Examples) {
  EXPECT_EQ(min_depth(0.5, 1.0, 5), 10);
  EXPECT_EQ(min_depth(0.0, 1.0, 4), 4);
  EXPECT_THROW(min_depth(1.0, 1.0, 1), ConfigError);
  EXPECT_EQ(min_depth(1.0, 1.0, 0), 0);
  EXPECT_DOUBLE_EQ(dynamic_slack(10, 0.5, 1.0), 5.0);
  EXPECT_DOUBLE_EQ(dynamic_slack(7, 1.0, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(dynamic_slack(0, 0.3, 1.0), 0.0);
  EXPECT_THROW(dynamic_slack(3, 2.0, 1.0), ConfigError);
  EXPECT_THROW(min_depth(-1.0, 1.0, 1), ConfigError);
  EXPECT_THROW(min_depth(0.5, 1.0, -1), ConfigError);
  // Physical units: 10 GHz peak, 6 Gtoken/s average.
  EXPECT_EQ(min_depth(6e9, 1e-10, 8), 20);
}

TEST(Depth, DualityOnRandomInputs) {
  SplitMix64 rng(77);
  for (int i = 0; i < 10000; ++i) {
    const double P = std::pow(10.0, -12 + 3 * rng.uniform());
    const double T = rng.uniform() * 0.999 / P;
    const double D = rng.uniform() * 200;
    const long n = min_depth(T, P, D);
    ASSERT_GE(dynamic_slack(n, T, P), D);
    if (n > 0) {
      ASSERT_LT(dynamic_slack(n - 1, T, P), D);
    }
  }
}

// --- sweeps -----------------------------------------------------------------------

TEST(Sweep, EqualPathDesignNeverMisSyncs) {
  const auto c = equal_paths();
  for (double ghz : {30.0, 50.0}) {
    const auto pts = sweep_phase({DesignKind::Baseline, 2, 1}, c, ghz, SimTime::ticks(period_from_ghz(ghz).count() / 1000));
    EXPECT_GE(pts.size(), 1000u);
    for (const auto& p : pts) ASSERT_NE(p.outcome.classification, Classification::MisSync);
  }
}

TEST(Sweep, BandMeasureMatchesAnalyticLer) {
  for (double ghz : {30.0, 50.0}) {
    CdcHarness h({DesignKind::Baseline, 2, 1}, cal, period_from_ghz(ghz));
    const SimTime res = SimTime::ticks(h.period().count() / 1000);
    const auto pts = sweep_phase(h, res);
    const auto w = chain_window(cal.dro, h.geometry(), 1);
    std::size_t bad = 0;
    for (const auto& p : pts) {
      const Real s = Real(p.slack_ticks) / SimTime::ticks_per_ps;
      const bool mis = p.outcome.classification == Classification::MisSync;
      if (w.edge_distance(s) * SimTime::ticks_per_ps > 3) {
        ASSERT_EQ(mis, w.contains(s));
      }
      bad += mis;
    }
    const double measured = static_cast<double>(bad) / static_cast<double>(pts.size());
    EXPECT_NEAR(measured, ler_analytic(cal.dro, h.geometry(), 1), 2.0 / static_cast<double>(pts.size())) << ghz;
  }
}

TEST(Sweep, QcdcBandIsAThousandthOfBaseline) {
  // Fine sweeps over just the windows (baseline ≈ 2 fs, qcdc ≈ 1 as).
  auto band = [](const DesignSpec& spec, std::int64_t step) {
    CdcHarness h(spec, cal, period_from_ghz(30.0));
    const auto w = chain_window(cal.dro, h.geometry(), spec.sync_depth());
    // Union of the intervals padded by 200 ticks (slivers near Δ_fail overlap).
    std::vector<std::pair<std::int64_t, std::int64_t>> spans;
    for (const auto& iv : w.intervals) {
      const auto lo = static_cast<std::int64_t>(iv.lo * SimTime::ticks_per_ps) - 200;
      const auto hi = static_cast<std::int64_t>(iv.hi * SimTime::ticks_per_ps) + 200;
      if (!spans.empty() && lo <= spans.back().second) spans.back().second = std::max(spans.back().second, hi);
      else spans.emplace_back(lo, hi);
    }
    std::int64_t bad = 0;
    for (const auto& [lo, hi] : spans) {
      const auto pts = sweep_phase(h, SimTime::ticks(step), h.phase_for_slack_ticks(lo), h.phase_for_slack_ticks(lo) + SimTime::ticks(hi - lo));
      for (const auto& p : pts) bad += p.outcome.classification == Classification::MisSync;
    }
    return bad * step;
  };
  const auto b = band({DesignKind::Baseline, 2, 1}, 1);
  const auto q = band({DesignKind::Qcdc, 2, 2}, 1);
  EXPECT_NEAR(static_cast<double>(b), 6.5146e-5 * 33'333'333.0, 3.0);  // ticks
  EXPECT_LE(q * 1000, b);
}

// --- Monte Carlo --------------------------------------------------------------------

TEST(MonteCarlo, EmptyWindowGivesZero) {
  const auto r = ler_monte_carlo({DesignKind::Baseline, 2, 1}, equal_paths(), 30.0, 20000, 3, 2);
  EXPECT_EQ(r.failures, 0u);
  EXPECT_EQ(r.ler, 0.0);
  EXPECT_EQ(r.method, LerMethod::MonteCarlo);
}

TEST(MonteCarlo, BaselineWithinThreeSigmaOfAnalytic) {
  const std::uint64_t n = 1'000'000;
  const auto r = ler_monte_carlo({DesignKind::Baseline, 2, 1}, cal, 30.0, n, 1, 4);
  const double p = ler_analytic(cal.dro, sync_geometry(cal, period_from_ghz(30.0)), 1);
  const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(n));
  EXPECT_NEAR(r.ler, p, 3 * sigma);
  EXPECT_EQ(r.lost, 0u);
  EXPECT_LE(r.ci.lo, r.ler);
  EXPECT_GE(r.ci.hi, r.ler);
}

TEST(MonteCarlo, SeededAndWorkerIndependent) {
  const DesignSpec s{DesignKind::Baseline, 2, 1};
  const auto a = ler_monte_carlo(s, cal, 50.0, 30000, 9, 1, 1000);
  const auto b = ler_monte_carlo(s, cal, 50.0, 30000, 9, 4, 1000);
  const auto c = ler_monte_carlo(s, cal, 50.0, 30000, 10, 4, 1000);
  EXPECT_EQ(a.failures, b.failures);
  ASSERT_EQ(a.buckets.size(), b.buckets.size());
  for (std::size_t i = 0; i < a.buckets.size(); ++i) EXPECT_EQ(a.buckets[i].failures, b.buckets[i].failures);
  EXPECT_NE(a.failures, c.failures);
}

TEST(MonteCarlo, RejectsZeroTrials) {
  EXPECT_THROW(ler_monte_carlo({DesignKind::Baseline, 2, 1}, cal, 30.0, 0, 1), ConfigError);
}

TEST(Analytic, ReportFields) {
  const auto r = ler_analytic_report({DesignKind::Qcdc, 2, 2}, cal, 30.0);
  EXPECT_EQ(r.method, LerMethod::Analytic);
  EXPECT_NEAR(r.ler, 3.7926e-8, 1e-11);
}

// --- accumulator --------------------------------------------------------------------

TEST(Accumulator, CleanTransfersCountExactly) {
  const auto r = accumulator_demo({DesignKind::Baseline, 4, 1}, cal, 30.0, 9, std::nullopt);
  EXPECT_EQ(r.expected, 9);
  EXPECT_EQ(r.actual, 9);
}

TEST(Accumulator, ForcedMisSyncUndercountsByOne) {
  const auto r = accumulator_demo({DesignKind::Baseline, 4, 1}, cal, 30.0, 9, 0.5);
  EXPECT_EQ(r.actual, 8);
  EXPECT_EQ(r.valid_early, 1);
}

TEST(Accumulator, QcdcCountsExactlyAtTheSameSlack) {
  for (double ghz : {30.0, 50.0}) {
    const double s = ghz == 30.0 ? 0.5 : 1.0;
    EXPECT_EQ(accumulator_demo({DesignKind::Baseline, 4, 1}, cal, ghz, 5, s).actual, 4);
    EXPECT_EQ(accumulator_demo({DesignKind::Qcdc, 4, 2}, cal, ghz, 5, s).actual, 5);
  }
}

TEST(Accumulator, IdentityOnRandomSchedules) {
  SplitMix64 rng(2024);
  for (int seed = 0; seed < 50; ++seed) {
    std::vector<double> slacks;
    for (int i = 0; i < 8; ++i) slacks.push_back(0.001 + rng.uniform() * 2.5);
    const auto r = accumulator_run({DesignKind::Baseline, 3, 1}, cal, 50.0, slacks);
    ASSERT_EQ(r.actual, r.expected - r.valid_early);
  }
}

TEST(Accumulator, RejectsEmptyStream) {
  EXPECT_THROW(accumulator_demo({DesignKind::Baseline, 4, 1}, cal, 30.0, 0, std::nullopt), ConfigError);
}

// --- Table 1 ------------------------------------------------------------------------

TEST(Table1, WorksColumns) {
  const auto rows = reproduce_table1(cal);
  ASSERT_EQ(rows.size(), 8u);
  const bool base[] = {true, true, false, true, true, false, true, true};
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_EQ(rows[i].baseline_works, base[i]) << rows[i].ghz << " GHz, " << rows[i].slack_ps << " ps";
    EXPECT_TRUE(rows[i].proposed_works) << rows[i].ghz << " GHz, " << rows[i].slack_ps << " ps";
  }
  EXPECT_NEAR(*rows[0].baseline_q, 8.1, 1e-6);
  EXPECT_NEAR(*rows[0].proposed_q, 8.1, 1e-6);
}
