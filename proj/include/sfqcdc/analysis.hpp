#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "calibration.hpp"
#include "error.hpp"
#include "fifo_builders.hpp"
#include "kernel.hpp"
#include "rng.hpp"
#include "window.hpp"

namespace sfq {

// ---------------------------------------------------------------------------
// Outcome classification

enum class Classification { SyncSameCycle, SyncLate, MisSync, Lost };

inline const char* to_string(Classification c) {
  switch (c) {
    case Classification::SyncSameCycle: return "SyncSameCycle";
    case Classification::SyncLate: return "SyncLate";
    case Classification::MisSync: return "MisSync";
    case Classification::Lost: return "Lost";
  }
  return "?";
}

struct TransferOutcome {
  std::optional<std::int64_t> valid_cycle, data_cycle;
  Classification classification = Classification::Lost;
  bool works() const {
    return classification == Classification::SyncSameCycle || classification == Classification::SyncLate;
  }
  bool valid_early() const {
    return classification == Classification::MisSync && *valid_cycle < *data_cycle;
  }
};

struct ReadClock {
  SimTime period;
  SimTime phase;
  std::int64_t cycle_of(SimTime t) const {
    const auto d = t.count() - phase.count();
    const auto p = period.count();
    return d >= 0 ? d / p : -((-d + p - 1) / p);  // floor
  }
};

inline Classification classify_cycles(std::optional<std::int64_t> v, std::optional<std::int64_t> d,
                                      std::int64_t nominal) {
  if (!v || !d) return Classification::Lost;
  if (*v != *d) return Classification::MisSync;
  return *v > nominal ? Classification::SyncLate : Classification::SyncSameCycle;
}

namespace detail {
inline std::optional<std::int64_t> single_cycle(const std::vector<SimTime>& pulses, const ReadClock& rc,
                                                const char* what) {
  std::optional<std::int64_t> c;
  for (std::size_t i = 0; i < pulses.size(); ++i) {
    const auto ci = rc.cycle_of(pulses[i]);
    if (i > 0 && ci == rc.cycle_of(pulses[i - 1]))
      throw ProtocolViolation(std::string("two ") + what + " pulses in read cycle " + std::to_string(ci));
    if (!c) c = ci;
  }
  return c;
}
}  // namespace detail

/// Single-transfer classification from a trace with VALID_OUT and DATA_OUT.
inline TransferOutcome classify_transfer(const Trace& tr, const ReadClock& rc, std::int64_t nominal_cycle) {
  if (!tr.has("VALID_OUT") || !tr.has("DATA_OUT")) throw ConfigError("trace lacks VALID_OUT/DATA_OUT");
  TransferOutcome o;
  o.valid_cycle = detail::single_cycle(tr["VALID_OUT"], rc, "VALID");
  o.data_cycle = detail::single_cycle(tr["DATA_OUT"], rc, "DATA");
  o.classification = classify_cycles(o.valid_cycle, o.data_cycle, nominal_cycle);
  return o;
}

// ---------------------------------------------------------------------------
// Statistics

struct Interval95 {
  double lo = 0, hi = 0;
};

/// Wilson score interval at 95%.
inline Interval95 wilson(std::uint64_t failures, std::uint64_t trials) {
  if (trials == 0) return {0, 1};
  constexpr double z = 1.959963984540054;
  const double n = static_cast<double>(trials), p = static_cast<double>(failures) / n;
  const double den = 1 + z * z / n;
  const double centre = (p + z * z / (2 * n)) / den;
  const double half = z * std::sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den;
  // The bounds are exactly 0 or 1 at the extremes; avoid rounding residue.
  return {failures == 0 ? 0.0 : std::max(0.0, centre - half), failures == trials ? 1.0 : std::min(1.0, centre + half)};
}

enum class LerMethod { MonteCarlo, Analytic };

struct LerReport {
  std::uint64_t trials = 0;
  std::uint64_t failures = 0;
  std::uint64_t lost = 0;
  double ler = 0;
  Interval95 ci;
  LerMethod method = LerMethod::MonteCarlo;
  struct Bucket {
    std::uint64_t first = 0, count = 0, failures = 0;
  };
  std::vector<Bucket> buckets;
};

/// Mean time between failures in seconds; infinite when ler is 0.
inline double mtbf(double ler, double transfer_rate) {
  if (!(transfer_rate > 0)) throw ConfigError("mtbf: transfer rate must be positive");
  if (ler < 0 || ler > 1) throw ConfigError("mtbf: ler must be a probability");
  if (ler == 0) return std::numeric_limits<double>::infinity();
  return 1.0 / (ler * transfer_rate);
}

// ---------------------------------------------------------------------------
// Depth sizing:  D = N (1 − T P)

struct DepthSizing {
  long N = 0;
  double T = 0;  // tokens/s
  double P = 0;  // s
  double D = 0;  // tokens
};

inline double dynamic_slack(long N, double T, double P) {
  const double tp = T * P;
  if (!(tp >= 0 && tp <= 1)) throw ConfigError("dynamic_slack: need 0 <= T*P <= 1");
  if (N < 0) throw ConfigError("dynamic_slack: N must be non-negative");
  return static_cast<double>(N) * (1.0 - tp);
}

/// Smallest N with N(1 − TP) >= D.
inline long min_depth(double T, double P, double D) {
  const double tp = T * P;
  if (!(D >= 0) || !std::isfinite(D)) throw ConfigError("min_depth: D must be a non-negative number");
  if (!(tp >= 0) || !std::isfinite(tp)) throw ConfigError("min_depth: T*P must be non-negative");
  if (D == 0) return 0;
  if (tp >= 1) throw ConfigError("min_depth: infeasible, no dynamic slack when T*P >= 1");
  const double guess = std::ceil(D / (1.0 - tp));
  if (guess > 9e15) throw ConfigError("min_depth: required depth out of range");
  long n = static_cast<long>(guess);
  // Settle rounding so the result is exactly minimal under dynamic_slack().
  while (dynamic_slack(n, T, P) < D) ++n;
  while (n > 0 && dynamic_slack(n - 1, T, P) >= D) --n;
  return n;
}

// ---------------------------------------------------------------------------
// Transfer harness

struct DesignSpec {
  DesignKind kind = DesignKind::Baseline;
  int stages = 2;
  int k = 1;  // sync DROs (qcdc)

  int sync_depth() const { return kind == DesignKind::Qcdc ? k : 1; }
  std::string label() const {
    return kind == DesignKind::Qcdc ? "qcdc:" + std::to_string(k) : kind == DesignKind::Baseline ? "baseline" : "shift";
  }
};

inline FifoDesign build(const DesignSpec& s, const Calibration& cal, const BuildOptions& o) {
  switch (s.kind) {
    case DesignKind::ShiftRegister: return build_shift_register_fifo(s.stages, cal, o);
    case DesignKind::Baseline: return build_baseline_cdc(s.stages, cal, o);
    case DesignKind::Qcdc: return build_qcdc(s.stages, s.k, cal, o);
  }
  throw ConfigError("unknown design");
}

struct DroSample {
  double slack_ps = 0;
  bool deferred = false;
  double q_ps = 0;  // clock-to-Q when not deferred
};

struct TransferResult {
  SimTime phase;
  double slack_ps = 0;  // at the first sync DRO
  TransferOutcome outcome;
  std::int64_t nominal_cycle = 0;
  std::optional<DroSample> first_sync, last_sync;
  std::vector<SimTime> valid, data;
};

/// One CDC design at one read frequency, with a single token written at
/// t = 0. Phase of READ_CLK is the free variable; a pilot run fixes when the
/// token reaches X1.d so phases can be expressed as slacks.
class CdcHarness {
 public:
  CdcHarness(DesignSpec spec, const Calibration& cal, SimTime period, SimOptions opt = {})
      : spec_(spec), cal_(cal), period_(period) {
    if (spec.kind == DesignKind::ShiftRegister) throw ConfigError("harness needs a CDC design");
    BuildOptions bo;
    bo.read_period = period;
    design_ = build(spec, cal, bo);
    opt.log_readouts = true;
    sim_.emplace(design_.netlist, opt);
    SimOptions ref_opt = opt;
    ref_opt.nominal_dro = true;
    ref_.emplace(design_.netlist, ref_opt);
    // Pilot: read clock phase is irrelevant to the write-side arrival.
    sim_->probe_net(design_.sync_data_driver);
    sim_->reset();
    sim_->run_until(SimTime::ps(1000.0));
    const auto& arr = sim_->trace()[design_.sync_data_driver];
    if (arr.empty()) throw SimulationError("pilot run: token never reached the synchronizer");
    t_d_ = arr.front();
    horizon_ = t_d_ + period_ * (spec.sync_depth() + 4) + SimTime::ps(60.0);
  }

  const FifoDesign& design() const { return design_; }
  const DesignSpec& spec() const { return spec_; }
  SimTime period() const { return period_; }
  SimTime data_arrival() const { return t_d_; }
  SyncGeometry geometry() const { return design_.geometry; }
  /// State of the last run() / quick().
  const Simulator& simulator() const { return *sim_; }

  /// READ_CLK phase giving the requested slack (ps, in (0, P]) at X1.
  SimTime phase_for_slack(double slack_ps) const { return phase_for_slack_ticks(SimTime::ps(slack_ps).count()); }
  SimTime phase_for_slack_ticks(std::int64_t s) const {
    const std::int64_t P = period_.count();
    const std::int64_t v = t_d_.count() + s - design_.first_sync_insertion.count();
    return SimTime::ticks(((v % P) + P) % P);
  }
  /// Slack in ticks at X1 for a given phase, in (0, P].
  std::int64_t slack_ticks(SimTime phase) const {
    const std::int64_t P = period_.count();
    const std::int64_t v = phase.count() + design_.first_sync_insertion.count() - t_d_.count();
    const std::int64_t r = ((v % P) + P) % P;
    return r == 0 ? P : r;
  }

  /// Full transfer. `reference` adds the constant-d_nom run for SyncLate.
  TransferResult run(SimTime phase, bool reference = true) {
    TransferResult r;
    r.phase = phase;
    r.slack_ps = static_cast<double>(slack_ticks(phase)) / SimTime::ticks_per_ps;
    const ReadClock rc{period_, phase};

    sim_->set_clock("READ_CLK", period_, phase);
    sim_->reset();
    const Trace& tr = sim_->run_until(horizon_);
    r.valid = tr["VALID_OUT"];
    r.data = tr["DATA_OUT"];
    for (const auto& ro : sim_->readouts()) {
      const auto& name = sim_->cell_name(ro.cell);
      DroSample s{ro.slack_ps, ro.deferred, ro.deferred ? 0.0 : (ro.q - ro.clock).to_ps()};
      if (name == "X1" && !r.first_sync) r.first_sync = s;
      if (name == "X" + std::to_string(spec_.sync_depth()) && !ro.released) r.last_sync = s;
    }

    if (reference) {
      ref_->set_clock("READ_CLK", period_, phase);
      ref_->reset();
      const Trace& rt = ref_->run_until(horizon_);
      const auto& rv = rt["VALID_OUT"];
      if (rv.empty()) throw SimulationError("reference run produced no VALID");
      r.nominal_cycle = rc.cycle_of(rv.front());
    }
    r.outcome = classify_transfer(tr, rc, reference ? r.nominal_cycle : std::numeric_limits<std::int64_t>::max());
    return r;
  }

  TransferResult run_slack(double slack_ps, bool reference = true) { return run(phase_for_slack(slack_ps), reference); }

  /// Cheap path for Monte Carlo: MisSync / Lost / fine.
  Classification quick(SimTime phase) {
    sim_->set_clock("READ_CLK", period_, phase);
    sim_->reset();
    const Trace& tr = sim_->run_until(horizon_);
    const auto& v = tr["VALID_OUT"];
    const auto& d = tr["DATA_OUT"];
    if (v.empty() || d.empty()) return Classification::Lost;
    const ReadClock rc{period_, phase};
    return rc.cycle_of(v.front()) == rc.cycle_of(d.front()) ? Classification::SyncSameCycle : Classification::MisSync;
  }

 private:
  DesignSpec spec_;
  Calibration cal_;
  SimTime period_;
  FifoDesign design_;
  std::optional<Simulator> sim_, ref_;
  SimTime t_d_, horizon_;
};

// ---------------------------------------------------------------------------
// Sweeps and Monte Carlo

struct SweepPoint {
  SimTime phase;
  std::int64_t slack_ticks;
  TransferOutcome outcome;
};

/// One simulation per phase in [first, last] stepping by `resolution`.
inline std::vector<SweepPoint> sweep_phase(CdcHarness& h, SimTime resolution, std::optional<SimTime> first = {},
                                           std::optional<SimTime> last = {}) {
  if (resolution.count() <= 0) throw ConfigError("sweep_phase: resolution must be positive");
  const SimTime lo = first.value_or(SimTime{});
  const SimTime hi = last.value_or(h.period() - SimTime::ticks(1));
  std::vector<SweepPoint> out;
  for (SimTime p = lo; p <= hi; p += resolution) {
    const SimTime ph = SimTime::ticks(p.count() % h.period().count());
    auto r = h.run(ph);
    out.push_back({ph, h.slack_ticks(ph), r.outcome});
  }
  return out;
}

inline std::vector<SweepPoint> sweep_phase(const DesignSpec& spec, const Calibration& cal, double read_ghz,
                                           SimTime resolution) {
  CdcHarness h(spec, cal, period_from_ghz(read_ghz));
  return sweep_phase(h, resolution);
}

/// Uniform-phase Monte Carlo. Trial i draws its phase from an independent
/// SplitMix64 stream keyed by (seed, i); counts are reduced per bucket in
/// trial order, so the report is the same for any worker count.
inline LerReport ler_monte_carlo(const DesignSpec& spec, const Calibration& cal, double read_ghz,
                                 std::uint64_t trials, std::uint64_t seed, unsigned workers = 1,
                                 std::uint64_t bucket_size = 100000) {
  if (trials < 1) throw ConfigError("ler_monte_carlo: trials must be >= 1");
  if (bucket_size < 1) throw ConfigError("ler_monte_carlo: bucket size must be >= 1");
  const SimTime period = period_from_ghz(read_ghz);
  workers = std::max(1u, workers);
  const std::uint64_t nb = (trials + bucket_size - 1) / bucket_size;
  std::vector<LerReport::Bucket> buckets(nb);
  std::vector<std::uint64_t> lost(nb, 0);
  for (std::uint64_t b = 0; b < nb; ++b) {
    buckets[b].first = b * bucket_size;
    buckets[b].count = std::min(bucket_size, trials - b * bucket_size);
  }

  // Build once to surface config errors on the calling thread.
  CdcHarness proto(spec, cal, period);
  auto work = [&](unsigned w, CdcHarness& h) {
    for (std::uint64_t b = w; b < nb; b += workers) {
      auto& bk = buckets[b];
      for (std::uint64_t i = bk.first; i < bk.first + bk.count; ++i) {
        auto rng = SplitMix64::stream(seed, i);
        const SimTime phase = SimTime::ticks(static_cast<std::int64_t>(rng.below(period.count())));
        const auto c = h.quick(phase);
        bk.failures += c == Classification::MisSync;
        lost[b] += c == Classification::Lost;
      }
    }
  };
  if (workers == 1) {
    work(0, proto);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          CdcHarness h(spec, cal, period);
          work(w, h);
        } catch (...) {
          errs[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errs)
      if (e) std::rethrow_exception(e);
  }

  LerReport r;
  r.method = LerMethod::MonteCarlo;
  r.trials = trials;
  for (std::uint64_t b = 0; b < nb; ++b) {
    r.failures += buckets[b].failures;
    r.lost += lost[b];
  }
  r.ler = static_cast<double>(r.failures) / static_cast<double>(trials);
  r.ci = wilson(r.failures, trials);
  r.buckets = std::move(buckets);
  return r;
}

inline LerReport ler_analytic_report(const DesignSpec& spec, const Calibration& cal, double read_ghz) {
  const SimTime period = period_from_ghz(read_ghz);
  LerReport r;
  r.method = LerMethod::Analytic;
  r.ler = ler_analytic(cal.dro, sync_geometry(cal, period), spec.sync_depth());
  r.ci = {r.ler, r.ler};
  return r;
}

// ---------------------------------------------------------------------------
// Accumulator: a read-domain counter that adds one whenever VALID and DATA
// land in the same read cycle.

struct AccumulatorResult {
  int expected = 0;
  int actual = 0;
  int valid_early = 0;  // MisSync transfers with VALID a cycle before DATA
  int mis_sync = 0;
  std::vector<TransferOutcome> transfers;
};

/// Writes one token per entry of `slacks` (ps at X1), each aimed at its own
/// read edge `spacing` periods after the previous one.
inline AccumulatorResult accumulator_run(const DesignSpec& spec, const Calibration& cal, double read_ghz,
                                         const std::vector<double>& slacks, int spacing = 6) {
  if (slacks.empty()) throw ConfigError("accumulator: need at least one token");
  const SimTime period = period_from_ghz(read_ghz);
  CdcHarness pilot(spec, cal, period);
  const SimTime latency = pilot.data_arrival();  // write at 0 → X1.d at latency
  const SimTime insertion = pilot.design().first_sync_insertion;
  const SimTime phase{};

  BuildOptions bo;
  bo.read_period = period;
  bo.read_phase = phase;
  bo.writes.clear();
  // Token i is captured by X1 at read edge e_i = base + i*spacing.
  const std::int64_t base = (latency.count() + period.count()) / period.count() + 1;
  for (std::size_t i = 0; i < slacks.size(); ++i) {
    const SimTime edge = insertion + period * (base + static_cast<std::int64_t>(i) * spacing);
    const SimTime s = SimTime::ps(slacks[i]);
    if (s.count() <= 0 || s > period) throw ConfigError("accumulator: slack must be in (0, P]");
    bo.writes.push_back(edge - s - latency);
  }
  const FifoDesign fd = build(spec, cal, bo);
  Simulator sim(fd.netlist);
  const SimTime horizon = bo.writes.back() + latency + period * (spec.sync_depth() + spacing + 2);
  const Trace& tr = sim.run_until(horizon);
  const ReadClock rc{period, phase};
  const auto& v = tr["VALID_OUT"];
  const auto& d = tr["DATA_OUT"];

  AccumulatorResult r;
  r.expected = static_cast<int>(slacks.size());
  // The counter itself.
  {
    std::vector<std::int64_t> vc, dc;
    for (auto t : v) vc.push_back(rc.cycle_of(t));
    for (auto t : d) dc.push_back(rc.cycle_of(t));
    if (std::adjacent_find(vc.begin(), vc.end()) != vc.end() || std::adjacent_find(dc.begin(), dc.end()) != dc.end())
      throw ProtocolViolation("accumulator: two pulses in one read cycle");
    std::vector<std::int64_t> both;
    std::set_intersection(vc.begin(), vc.end(), dc.begin(), dc.end(), std::back_inserter(both));
    r.actual = static_cast<int>(both.size());
  }
  // Per-transfer view: the i-th VALID and i-th DATA pulse belong to token i.
  for (std::size_t i = 0; i < slacks.size(); ++i) {
    TransferOutcome o;
    if (i < v.size()) o.valid_cycle = rc.cycle_of(v[i]);
    if (i < d.size()) o.data_cycle = rc.cycle_of(d[i]);
    o.classification = classify_cycles(o.valid_cycle, o.data_cycle, std::numeric_limits<std::int64_t>::max());
    r.mis_sync += o.classification == Classification::MisSync;
    r.valid_early += o.valid_early();
    r.transfers.push_back(o);
  }
  return r;
}

/// n_tokens transfers at a comfortable slack, the middle one forced to
/// `forced_slack_ps`.
inline AccumulatorResult accumulator_demo(const DesignSpec& spec, const Calibration& cal, double read_ghz,
                                          int n_tokens, std::optional<double> forced_slack_ps) {
  if (n_tokens < 1) throw ConfigError("accumulator: n_tokens must be >= 1");
  std::vector<double> slacks(static_cast<std::size_t>(n_tokens), 5.0);
  if (forced_slack_ps) slacks[slacks.size() / 2] = *forced_slack_ps;
  return accumulator_run(spec, cal, read_ghz, slacks);
}

// ---------------------------------------------------------------------------
// Table 1

struct Table1Row {
  double ghz = 0;
  double slack_ps = 0;
  std::optional<double> baseline_q;  // nullopt = deferred
  std::optional<double> proposed_q;
  bool baseline_works = false;
  bool proposed_works = false;
  Classification baseline = Classification::Lost, proposed = Classification::Lost;
};

inline std::vector<Table1Row> reproduce_table1(const Calibration& cal, int stages = 10) {
  std::vector<Table1Row> rows;
  for (double ghz : {30.0, 50.0}) {
    CdcHarness base({DesignKind::Baseline, stages, 1}, cal, period_from_ghz(ghz));
    CdcHarness prop({DesignKind::Qcdc, stages, 2}, cal, period_from_ghz(ghz));
    for (double s : {2.0, 1.0, 0.5, 0.1}) {
      Table1Row row;
      row.ghz = ghz;
      row.slack_ps = s;
      const auto b = base.run_slack(s);
      const auto p = prop.run_slack(s);
      row.baseline = b.outcome.classification;
      row.proposed = p.outcome.classification;
      row.baseline_works = b.outcome.works();
      row.proposed_works = p.outcome.works();
      if (b.first_sync && !b.first_sync->deferred) row.baseline_q = b.first_sync->q_ps;
      if (p.last_sync && !p.last_sync->deferred) row.proposed_q = p.last_sync->q_ps;
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace sfq
