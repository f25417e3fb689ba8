#pragma once

// Command implementations for the `sfqcdc` tool. Kept in a header so tests
// can drive the exact code path in-process and compare output bytes.
//
// Exit codes: 0 ok, 1 internal/simulation error, 2 bad flags or config,
// 3 protocol violation.

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "sfqcdc/sfqcdc.hpp"

namespace sfqcli {

using namespace sfq;

inline std::string num(double x, int prec = 6) {
  std::ostringstream o;
  o << std::setprecision(prec) << x;
  return o.str();
}

struct DesignFlags {
  std::string design = "baseline";
  int stages = 2;
  int k = 0;  // 0 = unset
  double read_ghz = 30.0;

  DesignSpec spec() const {
    DesignSpec s;
    if (design == "shift") s.kind = DesignKind::ShiftRegister;
    else if (design == "baseline") s.kind = DesignKind::Baseline;
    else if (design == "qcdc") s.kind = DesignKind::Qcdc;
    else throw ConfigError("unknown design '" + design + "'");
    if (k != 0 && s.kind != DesignKind::Qcdc) throw ConfigError("--k applies only to --design qcdc");
    s.stages = stages;
    s.k = s.kind == DesignKind::Qcdc ? (k == 0 ? 2 : k) : 1;
    return s;
  }

  void add_to(CLI::App* c, bool with_design = true) {
    if (with_design)
      c->add_option("--design", design, "shift | baseline | qcdc")
          ->check(CLI::IsMember({"shift", "baseline", "qcdc"}))
          ->capture_default_str();
    c->add_option("--stages,-N", stages, "FIFO stages")->check(CLI::Range(1, 100000))->capture_default_str();
    c->add_option("--k", k, "synchronizer DROs (qcdc only, default 2)")->check(CLI::Range(1, 64));
    c->add_option("--read-ghz", read_ghz, "read clock frequency")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  }
};

/// "baseline" | "qcdc" | "qcdc:K"
inline DesignSpec parse_design_token(const std::string& tok, int stages) {
  DesignSpec s;
  s.stages = stages;
  if (tok == "baseline") return s;
  if (tok == "qcdc") return {DesignKind::Qcdc, stages, 2};
  if (tok.rfind("qcdc:", 0) == 0) {
    int k = 0;
    const auto v = tok.substr(5);
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), k);
    if (ec != std::errc{} || p != v.data() + v.size() || k < 1) throw ConfigError("bad design '" + tok + "'");
    return {DesignKind::Qcdc, stages, k};
  }
  throw ConfigError("unknown design '" + tok + "' (expected baseline, qcdc or qcdc:K)");
}

/// Opens `path` for writing, or returns `fallback` when path is empty or "-".
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
    if (!path.empty() && path != "-") {
      f_.open(path, std::ios::binary);
      if (!f_) throw ConfigError("cannot write '" + path + "'");
      os_ = &f_;
    }
  }
  std::ostream& operator*() { return *os_; }

 private:
  std::ofstream f_;
  std::ostream* os_;
};

// ---------------------------------------------------------------------------

struct RunFlags {
  DesignFlags d;
  std::optional<double> slack_ps;
  std::optional<double> clock_phase_ps;
  double write_ghz = 10.0;
  int tokens = 1;
  std::vector<double> send_ps;
  std::string trace, vcd, netlist, summary;
};

inline void cmd_run(const RunFlags& f, const Calibration& cal, std::ostream& out) {
  const DesignSpec spec = f.d.spec();
  Sink sum(f.summary, out);
  SimOptions so;
  so.fatal_protocol_violations = true;

  if (spec.kind == DesignKind::ShiftRegister) {
    if (f.slack_ps || f.clock_phase_ps) throw ConfigError("shift design has no read clock phase");
    BuildOptions bo;
    bo.writes.clear();
    const SimTime pw = period_from_ghz(f.write_ghz);
    for (int i = 0; i < f.tokens; ++i) bo.writes.push_back(pw * i);
    std::vector<SimTime> sends;
    for (double s : f.send_ps) sends.push_back(SimTime::ps(s));
    std::sort(sends.begin(), sends.end());
    const FifoDesign fd = build_shift_register_fifo(spec.stages, cal, bo, sends);
    Simulator sim(fd.netlist, so);
    SimTime horizon = bo.writes.back();
    if (!sends.empty()) horizon = std::max(horizon, sends.back());
    horizon += SimTime::ps(20.0 * (spec.stages + 2));
    const Trace& tr = sim.run_until(horizon);
    if (!f.trace.empty()) write_trace_text(*Sink(f.trace, out), tr);
    if (!f.vcd.empty()) write_trace_vcd(*Sink(f.vcd, out), tr);
    if (!f.netlist.empty()) *Sink(f.netlist, out) << serialize(fd.netlist);
    *sum << "design: shift\nstages: " << spec.stages << "\ntokens_written: " << f.tokens
         << "\nwrite_ack: " << tr["WRITE_ACK"].size() << "\nvalid_out: " << tr["VALID_OUT"].size()
         << "\ndata_out: " << tr["DATA_OUT"].size() << "\nevents: " << sim.stats().events << "\n";
    return;
  }

  if (f.slack_ps && f.clock_phase_ps) throw ConfigError("--phase-ps and --clock-phase-ps are exclusive");
  if (f.tokens != 1) throw ConfigError("--tokens applies only to --design shift (use `demo` for streams)");
  const SimTime period = period_from_ghz(f.d.read_ghz);
  CdcHarness h(spec, cal, period, so);
  SimTime phase;
  if (f.clock_phase_ps) {
    const SimTime p = SimTime::ps(*f.clock_phase_ps);
    if (*f.clock_phase_ps < 0 || p >= period) throw ConfigError("--clock-phase-ps must be in [0, period)");
    phase = p;
  } else {
    const double s = f.slack_ps.value_or(5.0);
    if (!(s > 0) || SimTime::ps(s) > period) throw ConfigError("--phase-ps must be in (0, period]");
    phase = h.phase_for_slack(s);
  }
  const TransferResult r = h.run(phase);
  const Trace& tr = h.simulator().trace();
  if (!f.trace.empty()) write_trace_text(*Sink(f.trace, out), tr);
  if (!f.vcd.empty()) write_trace_vcd(*Sink(f.vcd, out), tr);
  if (!f.netlist.empty()) *Sink(f.netlist, out) << serialize(h.design().netlist);

  auto cyc = [](const std::optional<std::int64_t>& c) { return c ? std::to_string(*c) : std::string("-"); };
  auto q = [](const std::optional<DroSample>& s) {
    if (!s) return std::string("-");
    return s->deferred ? std::string("deferred") : num(s->q_ps, 4);
  };
  auto& o = *sum;
  o << "design: " << spec.label() << "\nstages: " << spec.stages << "\nread_ghz: " << num(f.d.read_ghz)
    << "\nperiod_fs: " << period.fs_string() << "\nclock_phase_fs: " << phase.fs_string()
    << "\nslack_fs: " << SimTime::ticks(h.slack_ticks(phase)).fs_string() << "\nvalid_cycle: " << cyc(r.outcome.valid_cycle)
    << "\ndata_cycle: " << cyc(r.outcome.data_cycle) << "\nnominal_cycle: " << r.nominal_cycle
    << "\nfirst_sync_clock_to_q_ps: " << q(r.first_sync) << "\nlast_sync_clock_to_q_ps: " << q(r.last_sync)
    << "\ndata_out_fs: " << (r.data.empty() ? std::string("-") : r.data.front().fs_string())
    << "\nclassification: " << to_string(r.outcome.classification) << "\n";
}

// ---------------------------------------------------------------------------

struct SweepFlags {
  DesignFlags d;
  double resolution_fs = 0;  // 0 = period / 1000
  std::string csv, summary;
};

inline void cmd_sweep(const SweepFlags& f, const Calibration& cal, std::ostream& out) {
  const DesignSpec spec = f.d.spec();
  if (spec.kind == DesignKind::ShiftRegister) throw ConfigError("sweep needs a CDC design");
  const SimTime period = period_from_ghz(f.d.read_ghz);
  const SimTime res = f.resolution_fs > 0 ? SimTime::ticks(std::llround(f.resolution_fs * SimTime::ticks_per_fs))
                                          : SimTime::ticks(period.count() / 1000);
  if (res.count() <= 0) throw ConfigError("--resolution-fs too small");
  CdcHarness h(spec, cal, period);
  const auto pts = sweep_phase(h, res);

  Sink csv(f.csv, out);
  *csv << "phase_fs,slack_fs,valid_cycle,data_cycle,classification\n";
  std::map<Classification, std::size_t> count;
  for (const auto& p : pts) {
    auto c = [](const std::optional<std::int64_t>& v) { return v ? std::to_string(*v) : std::string(); };
    *csv << p.phase.fs_string() << ',' << SimTime::ticks(p.slack_ticks).fs_string() << ','
         << c(p.outcome.valid_cycle) << ',' << c(p.outcome.data_cycle) << ','
         << to_string(p.outcome.classification) << '\n';
    ++count[p.outcome.classification];
  }
  if (f.csv.empty() || f.csv == "-") return;
  Sink sum(f.summary, out);
  *sum << "design: " << spec.label() << "\nread_ghz: " << num(f.d.read_ghz) << "\npoints: " << pts.size()
       << "\nresolution_fs: " << res.fs_string();
  for (auto c : {Classification::SyncSameCycle, Classification::SyncLate, Classification::MisSync,
                 Classification::Lost})
    *sum << '\n' << to_string(c) << ": " << count[c];
  *sum << "\nmis_sync_fraction: " << num(static_cast<double>(count[Classification::MisSync]) / pts.size())
       << "\nanalytic_ler: " << num(ler_analytic(cal.dro, h.geometry(), spec.sync_depth())) << '\n';
}

// ---------------------------------------------------------------------------

struct LerFlags {
  DesignFlags d;
  std::string compare;
  bool analytic = false;
  std::uint64_t trials = 1000000;
  std::uint64_t seed = 1;
  unsigned workers = 0;  // 0 = hardware concurrency
  std::uint64_t bucket = 100000;
  double rate = 0;  // transfers/s for MTBF; 0 = read frequency
  std::string csv, summary;
};

inline void cmd_ler(const LerFlags& f, const Calibration& cal, std::ostream& out) {
  std::vector<DesignSpec> designs;
  if (!f.compare.empty()) {
    std::stringstream ss(f.compare);
    for (std::string tok; std::getline(ss, tok, ',');) designs.push_back(parse_design_token(tok, std::max(2, f.d.stages)));
  } else {
    const auto s = f.d.spec();
    if (s.kind == DesignKind::ShiftRegister) throw ConfigError("ler needs a CDC design");
    designs.push_back(s);
  }
  if (designs.empty()) throw ConfigError("--compare needs at least one design");
  const double rate = f.rate > 0 ? f.rate : f.d.read_ghz * 1e9;
  const unsigned workers = f.workers ? f.workers : std::max(1u, std::thread::hardware_concurrency());

  std::vector<LerReport> reps;
  for (const auto& d : designs)
    reps.push_back(f.analytic ? ler_analytic_report(d, cal, f.d.read_ghz)
                              : ler_monte_carlo(d, cal, f.d.read_ghz, f.trials, f.seed, workers, f.bucket));

  if (!f.analytic && !f.csv.empty()) {
    Sink csv(f.csv, out);
    *csv << "design,trial_begin,trial_end,failures\n";
    for (std::size_t i = 0; i < designs.size(); ++i)
      for (const auto& b : reps[i].buckets)
        *csv << designs[i].label() << ',' << b.first << ',' << b.first + b.count << ',' << b.failures << '\n';
  }
  Sink sum(f.summary, out);
  auto& o = *sum;
  o << "read_ghz: " << num(f.d.read_ghz) << "\nmethod: " << (f.analytic ? "analytic" : "monte-carlo");
  if (!f.analytic) o << "\ntrials: " << f.trials << "\nseed: " << f.seed;
  o << '\n';
  for (std::size_t i = 0; i < designs.size(); ++i) {
    const auto& r = reps[i];
    o << "[" << designs[i].label() << "]\n";
    if (!f.analytic) o << "failures: " << r.failures << "\nlost: " << r.lost << '\n';
    o << "ler: " << num(r.ler, 8) << '\n';
    if (!f.analytic) o << "ci95: " << num(r.ci.lo, 8) << ' ' << num(r.ci.hi, 8) << '\n';
    o << "mtbf_s: " << num(mtbf(r.ler, rate)) << '\n';
  }
  for (std::size_t i = 1; i < designs.size(); ++i) {
    o << "ratio " << designs[0].label() << '/' << designs[i].label() << ": ";
    if (reps[i].ler > 0) o << num(reps[0].ler / reps[i].ler, 8) << '\n';
    else o << "inf\n";
  }
}

// ---------------------------------------------------------------------------

struct AreaFlags {
  std::vector<int> stages = {2, 5, 10, 20};
  std::string design = "both";
  int k = 2;
  std::string out;
};

inline void cmd_area(const AreaFlags& f, const Calibration& cal, std::ostream& out) {
  Sink s(f.out, out);
  auto& o = *s;
  const bool b = f.design != "qcdc", q = f.design != "baseline";
  o << "stages";
  if (b) o << ",baseline_jj,baseline_um2";
  if (q) o << ",qcdc_jj,qcdc_um2";
  if (b && q) o << ",delta_um2,overhead_pct";
  o << '\n';
  for (int n : f.stages) {
    if (n < 2) throw ConfigError("area: CDC designs need N >= 2");
    o << n;
    AreaReport rb, rq;
    if (b) {
      rb = area(build_baseline_cdc(n, cal).netlist, cal.area);
      o << ',' << rb.jj_count << ',' << num(rb.area, 8);
    }
    if (q) {
      rq = area(build_qcdc(n, f.k, cal).netlist, cal.area);
      o << ',' << rq.jj_count << ',' << num(rq.area, 8);
    }
    if (b && q) {
      std::ostringstream pct;
      pct << std::fixed << std::setprecision(2) << 100.0 * (rq.area / rb.area - 1.0);
      o << ',' << num(rq.area - rb.area, 8) << ',' << pct.str();
    }
    o << '\n';
  }
}

// ---------------------------------------------------------------------------

struct DepthFlags {
  std::optional<double> tp, throughput, period;
  std::optional<double> slack;
  std::optional<long> stages;
};

inline void cmd_depth(const DepthFlags& f, std::ostream& out) {
  double T = 0, P = 0;
  if (f.tp) {
    if (f.throughput || f.period) throw ConfigError("give --tp or --throughput/--period, not both");
    T = *f.tp, P = 1.0;
  } else if (f.throughput && f.period) {
    T = *f.throughput, P = *f.period;
  } else {
    throw ConfigError("need --tp, or --throughput and --period");
  }
  if (f.stages && f.slack) throw ConfigError("give --slack (size a FIFO) or --stages (evaluate slack), not both");
  if (f.stages) {
    out << "tp: " << num(T * P) << "\nstages: " << *f.stages << "\ndynamic_slack: " << num(dynamic_slack(*f.stages, T, P), 12)
        << '\n';
    return;
  }
  if (!f.slack) throw ConfigError("need --slack or --stages");
  const long n = min_depth(T, P, *f.slack);
  out << "tp: " << num(T * P) << "\nslack: " << num(*f.slack) << "\nmin_depth: " << n << '\n';
}

// ---------------------------------------------------------------------------

inline void cmd_table1(int stages, const Calibration& cal, std::ostream& out) {
  auto yn = [](bool w) { return w ? "Yes" : "No"; };
  auto q = [](const std::optional<double>& v) { return v ? num(*v, 3) : std::string("-"); };
  out << "read_ghz,slack_ps,baseline_clock_to_q_ps,proposed_clock_to_q_ps,baseline_works,proposed_works,"
         "baseline_outcome,proposed_outcome\n";
  for (const auto& r : reproduce_table1(cal, stages))
    out << num(r.ghz) << ',' << num(r.slack_ps) << ',' << q(r.baseline_q) << ',' << q(r.proposed_q) << ','
        << yn(r.baseline_works) << ',' << yn(r.proposed_works) << ',' << to_string(r.baseline) << ','
        << to_string(r.proposed) << '\n';
}

// ---------------------------------------------------------------------------

struct DemoFlags {
  DesignFlags d;
  int tokens = 7;
  std::optional<double> force_slack_ps;
};

inline void cmd_demo(const DemoFlags& f, const Calibration& cal, std::ostream& out) {
  const DesignSpec spec = f.d.spec();
  if (spec.kind == DesignKind::ShiftRegister) throw ConfigError("demo needs a CDC design");
  const auto r = accumulator_demo(spec, cal, f.d.read_ghz, f.tokens, f.force_slack_ps);
  out << "design: " << spec.label() << "\nread_ghz: " << num(f.d.read_ghz) << "\ntokens: " << f.tokens
      << "\nforced_slack_ps: " << (f.force_slack_ps ? num(*f.force_slack_ps) : std::string("-")) << "\ntransfers:";
  for (const auto& t : r.transfers) out << ' ' << to_string(t.classification);
  out << "\nexpected_count: " << r.expected << "\nactual_count: " << r.actual << "\nvalid_early_mis_sync: "
      << r.valid_early << '\n';
}

// ---------------------------------------------------------------------------

/// Entry point shared by the binary and the tests. `args` excludes argv[0].
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pulse-level SFQ simulator and clock-domain-crossing FIFO analysis", "sfqcdc"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  std::string cal_path;
  app.add_option("--calibration", cal_path, std::string("calibration file (default: $") + calibration_env_var + ")");

  RunFlags rf;
  auto* run = app.add_subcommand("run", "simulate one transfer and classify it");
  rf.d.add_to(run);
  run->add_option("--phase-ps", rf.slack_ps, "read edge relative to data arrival at the crossing DRO (setup slack)");
  run->add_option("--clock-phase-ps", rf.clock_phase_ps, "raw READ_CLK phase");
  run->add_option("--write-ghz", rf.write_ghz, "token spacing for --design shift")->check(CLI::PositiveNumber);
  run->add_option("--tokens", rf.tokens, "tokens written (shift only)")->check(CLI::Range(1, 1000000));
  run->add_option("--send-ps", rf.send_ps, "SEND_IN pulse times (shift only)");
  run->add_option("--trace", rf.trace, "pulse list output");
  run->add_option("--vcd", rf.vcd, "VCD output");
  run->add_option("--netlist", rf.netlist, "write the elaborated netlist");
  run->add_option("--summary,-o", rf.summary, "summary output (default stdout)");

  SweepFlags sf;
  auto* sweep = app.add_subcommand("sweep", "one simulation per read-clock phase");
  sf.d.add_to(sweep);
  sweep->add_option("--resolution-fs", sf.resolution_fs, "phase step (default period/1000)")->check(CLI::NonNegativeNumber);
  sweep->add_option("--csv", sf.csv, "per-phase CSV (default stdout)");
  sweep->add_option("--summary,-o", sf.summary, "summary output when --csv is a file");

  LerFlags lf;
  auto* ler = app.add_subcommand("ler", "logical error rate, Monte Carlo or analytic");
  lf.d.add_to(ler);
  ler->add_option("--compare", lf.compare, "comma list, e.g. baseline,qcdc:2");
  ler->add_flag("--analytic", lf.analytic, "use the analytic dangerous window");
  ler->add_option("--trials", lf.trials)->check(CLI::Range(std::uint64_t{1}, std::numeric_limits<std::uint64_t>::max()))->capture_default_str();
  ler->add_option("--seed", lf.seed)->capture_default_str();
  ler->add_option("--workers", lf.workers, "threads (default: all cores)");
  ler->add_option("--bucket", lf.bucket, "trials per CSV row")->check(CLI::Range(std::uint64_t{1}, std::numeric_limits<std::uint64_t>::max()))->capture_default_str();
  ler->add_option("--rate", lf.rate, "transfers/s for MTBF (default read frequency)")->check(CLI::PositiveNumber);
  ler->add_option("--csv", lf.csv, "per-bucket failure counts");
  ler->add_option("--summary,-o", lf.summary, "summary output (default stdout)");

  AreaFlags af;
  auto* ar = app.add_subcommand("area", "JJ count and area per design");
  ar->add_option("--stages,-N", af.stages, "stage counts")->capture_default_str();
  ar->add_option("--design", af.design)->check(CLI::IsMember({"baseline", "qcdc", "both"}))->capture_default_str();
  ar->add_option("--k", af.k, "qcdc synchronizer DROs")->check(CLI::Range(1, 64))->capture_default_str();
  ar->add_option("--out,-o", af.out, "CSV output (default stdout)");

  DepthFlags df;
  auto* dp = app.add_subcommand("depth", "FIFO depth sizing, D = N(1 - TP)");
  dp->add_option("--tp", df.tp, "throughput x period");
  dp->add_option("--throughput", df.throughput, "tokens/s");
  dp->add_option("--period", df.period, "s");
  dp->add_option("--slack", df.slack, "required dynamic slack D");
  dp->add_option("--stages,-N", df.stages, "evaluate D for this N instead");
  std::string dp_out;
  dp->add_option("--out,-o", dp_out);

  int t1_stages = 10;
  std::string t1_out;
  auto* t1 = app.add_subcommand("table1", "slack/frequency comparison of baseline and qcdc:2");
  t1->add_option("--stages,-N", t1_stages)->check(CLI::Range(2, 100000))->capture_default_str();
  t1->add_option("--out,-o", t1_out);

  DemoFlags mf;
  mf.d.read_ghz = 30.0;
  mf.d.stages = 4;
  std::string demo_out;
  auto* demo = app.add_subcommand("demo", "read-domain accumulator fed by the FIFO");
  mf.d.add_to(demo);
  demo->add_option("--tokens", mf.tokens)->check(CLI::Range(1, 100000))->capture_default_str();
  demo->add_option("--force-slack-ps", mf.force_slack_ps, "slack of the middle token");
  demo->add_option("--out,-o", demo_out);

  std::string nl_out;
  DesignFlags nf;
  auto* nl = app.add_subcommand("netlist", "print the generated netlist");
  nf.add_to(nl);
  nl->add_option("--out,-o", nl_out);

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? 0 : 2;
  }

  try {
    const Calibration cal = Calibration::resolve(cal_path);
    if (*run) cmd_run(rf, cal, out);
    else if (*sweep) cmd_sweep(sf, cal, out);
    else if (*ler) cmd_ler(lf, cal, out);
    else if (*ar) cmd_area(af, cal, out);
    else if (*dp) cmd_depth(df, *Sink(dp_out, out));
    else if (*t1) cmd_table1(t1_stages, cal, *Sink(t1_out, out));
    else if (*demo) cmd_demo(mf, cal, *Sink(demo_out, out));
    else if (*nl) {
      const auto s = nf.spec();
      BuildOptions bo;
      bo.read_period = period_from_ghz(nf.read_ghz);
      *Sink(nl_out, out) << serialize(build(s, cal, bo).netlist);
    }
  } catch (const ProtocolViolation& e) {
    err << "sfqcdc: protocol violation: " << e.what() << '\n';
    return 3;
  } catch (const ParseError& e) {
    err << "sfqcdc: " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    err << "sfqcdc: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "sfqcdc: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace sfqcli
