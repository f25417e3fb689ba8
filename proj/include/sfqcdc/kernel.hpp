#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <queue>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "error.hpp"
#include "netlist.hpp"
#include "rng.hpp"
#include "time.hpp"

namespace sfq {

/// What a DRO does with a readout whose slack is at or below Δ_fail.
enum class DeferMode : std::uint8_t {
  HoldAndRelease,  // keep the flux, release on the next clock with d_nom
  EmitLate,        // release now, after SimOptions::late_delay
};

struct SimOptions {
  std::uint64_t event_cap = 100'000'000;
  bool fatal_protocol_violations = false;
  DeferMode defer_mode = DeferMode::HoldAndRelease;
  SimTime late_delay = SimTime::ps(40.0);
  bool nominal_dro = false;  // constant d_nom, never defer (reference runs)
  bool log_readouts = false;
};

struct SimStats {
  std::uint64_t events = 0;
  std::uint64_t protocol_violations = 0;
  std::uint64_t dro_double_data = 0;
  std::uint64_t dro_deferrals = 0;
  std::uint64_t dro_readouts = 0;
};

struct DroReadout {
  std::uint32_t cell;
  SimTime clock;
  double slack_ps;
  bool deferred;      // this edge deferred the readout
  bool released;      // this edge released a previously deferred readout
  SimTime q;          // output time (valid unless deferred)
};

/// Pulse instants recorded per probed name, in delivery order.
class Trace {
 public:
  const std::vector<SimTime>& operator[](std::string_view name) const {
    static const std::vector<SimTime> none;
    auto it = slot_.find(std::string(name));
    return it == slot_.end() ? none : pulses_[it->second];
  }
  bool has(std::string_view name) const { return slot_.count(std::string(name)) != 0; }
  const std::vector<std::string>& names() const { return names_; }
  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& p : pulses_) n += p.size();
    return n;
  }

  std::size_t add_slot(const std::string& name) {
    auto [it, fresh] = slot_.emplace(name, pulses_.size());
    if (fresh) {
      names_.push_back(name);
      pulses_.emplace_back();
    }
    return it->second;
  }
  void record(std::size_t slot, SimTime t) { pulses_[slot].push_back(t); }
  void clear_pulses() {
    for (auto& p : pulses_) p.clear();
  }

 private:
  std::unordered_map<std::string, std::size_t> slot_;
  std::vector<std::string> names_;
  std::vector<std::vector<SimTime>> pulses_;
};

/// Discrete-event engine. Events are ordered by (time, serial); serials are
/// handed out at schedule time, so simultaneous pulses fire in the order
/// they were scheduled. One instance is strictly single-threaded.
class Simulator {
 public:
  using NetId = std::uint32_t;
  static constexpr std::uint32_t none = std::numeric_limits<std::uint32_t>::max();

  explicit Simulator(const Netlist& nl, SimOptions opt = {}) : opt_(opt) {
    nl.validate();
    elaborate(nl);
    reset();
  }

  // --- configuration (takes effect at the next reset) -----------------------

  void set_clock(std::string_view cell, SimTime period, SimTime phase) {
    auto& c = cell_rt(cell, CellKind::ClockGen);
    if (period.count() <= 0 || phase >= period) throw ConfigError("set_clock: need 0 <= phase < period");
    c.period = period;
    c.phase = phase;
  }
  void set_source_times(std::string_view cell, std::vector<SimTime> times) {
    cell_rt(cell, CellKind::Source).times = std::move(times);
  }
  void set_jitter(std::string_view cell, Jitter j) { cell_rt(cell, CellKind::ClockGen).jitter = j; }
  SimOptions& options() { return opt_; }

  /// Records every pulse on the net driven by `driver_pin` under that name.
  void probe_net(const std::string& driver_pin) {
    const NetId n = net_id(driver_pin);
    if (nets_[n].slot == none) nets_[n].slot = static_cast<std::uint32_t>(trace_.add_slot(driver_pin));
  }

  NetId net_id(const std::string& driver_pin) const {
    auto it = net_by_name_.find(driver_pin);
    if (it == net_by_name_.end()) throw ConfigError("no net driven by '" + driver_pin + "'");
    return it->second;
  }

  // --- running --------------------------------------------------------------

  /// Back to t = 0 with initial cell state; sources and clocks re-armed.
  void reset() {
    heap_ = {};
    serial_ = 0;
    now_ = SimTime{};
    stats_ = {};
    readouts_.clear();
    trace_.clear_pulses();
    for (std::uint32_t i = 0; i < cells_.size(); ++i) {
      auto& c = cells_[i];
      c.armed_a = c.kind == CellKind::DottedCElement;
      c.armed_b = false;
      c.stored = c.deferred = false;
      c.arrival = SimTime{};
      c.edge = 0;
      if (c.kind == CellKind::Source) {
        for (auto t : c.times)
          if (c.out[0] != none) schedule(c.out[0], t);
      } else if (c.kind == CellKind::ClockGen && c.out[0] != none) {
        c.rng = SplitMix64(mix_seed(c.jitter.seed, i));
        push(edge_time(c), i, EventKind::ClockTick);
      }
    }
  }

  /// Enqueues a pulse on a net; returns its serial.
  std::uint64_t schedule(NetId net, SimTime t) {
    if (net >= nets_.size()) throw SimulationError("schedule: bad net id");
    if (t < now_) throw SimulationError("event scheduled in the past (cell behavior bug)");
    return push(t, net, EventKind::Pulse);
  }
  std::uint64_t schedule(const std::string& driver_pin, SimTime t) { return schedule(net_id(driver_pin), t); }

  /// Processes every event with time <= t_end. Resumable.
  const Trace& run_until(SimTime t_end) {
    while (!heap_.empty() && heap_.top().t <= t_end) {
      const Event e = heap_.top();
      heap_.pop();
      now_ = e.t;
      if (++stats_.events > opt_.event_cap)
        throw SimulationError("event storm: more than " + std::to_string(opt_.event_cap) + " events");
      if (e.kind == EventKind::Pulse)
        deliver_net(e.target, e.t);
      else
        clock_tick(e.target, e.t);
    }
    if (t_end > now_) now_ = t_end;
    return trace_;
  }

  SimTime now() const { return now_; }
  const Trace& trace() const { return trace_; }
  const SimStats& stats() const { return stats_; }
  std::size_t pending() const { return heap_.size(); }
  const std::vector<DroReadout>& readouts() const { return readouts_; }
  std::uint32_t cell_index(std::string_view name) const {
    auto it = cell_by_name_.find(std::string(name));
    if (it == cell_by_name_.end()) throw ConfigError("unknown cell '" + std::string(name) + "'");
    return it->second;
  }
  const std::string& cell_name(std::uint32_t i) const { return cells_.at(i).name; }

  /// True while a DRO holds un-read flux.
  bool dro_stored(std::string_view cell) const { return cells_.at(cell_index(cell)).stored; }

 private:
  enum class EventKind : std::uint8_t { Pulse, ClockTick };

  struct Event {
    SimTime t;
    std::uint64_t serial;
    std::uint32_t target;
    EventKind kind;
    bool operator>(const Event& o) const { return t != o.t ? t > o.t : serial > o.serial; }
  };

  struct Sink {
    std::uint32_t cell;
    std::uint8_t port;
  };

  struct NetRt {
    std::string name;
    std::vector<Sink> sinks;
    std::uint32_t slot = none;
  };

  struct CellRt {
    std::string name;
    CellKind kind;
    std::uint32_t out[2] = {none, none};
    SimTime delay;
    SimTime period, phase;
    Jitter jitter;
    std::vector<SimTime> times;
    ClockToQModel model;
    std::uint32_t slot = none;  // probes
    // state
    bool armed_a = false, armed_b = false;
    bool stored = false, deferred = false;
    SimTime arrival;
    std::int64_t edge = 0;
    SplitMix64 rng{0};
  };

  static std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t idx) {
    return SplitMix64(seed ^ (0x9e3779b97f4a7c15ULL * (idx + 1))).next();
  }

  CellRt& cell_rt(std::string_view name, CellKind kind) {
    auto& c = cells_.at(cell_index(name));
    if (c.kind != kind)
      throw ConfigError("cell '" + std::string(name) + "' is not a " + std::string(kind_name(kind)));
    return c;
  }

  void elaborate(const Netlist& nl) {
    cells_.reserve(nl.cells.size());
    for (std::uint32_t i = 0; i < nl.cells.size(); ++i) {
      const auto& s = nl.cells[i];
      CellRt c;
      c.name = s.name;
      c.kind = s.kind;
      c.delay = s.delay;
      c.period = s.period;
      c.phase = s.phase;
      c.jitter = s.jitter;
      c.times = s.times;
      c.model = s.model;
      if (s.kind == CellKind::Probe) c.slot = static_cast<std::uint32_t>(trace_.add_slot(s.name));
      cell_by_name_.emplace(s.name, i);
      cells_.push_back(std::move(c));
    }
    for (const auto& n : nl.nets) {
      const auto ci = cell_index(n.driver.cell);
      const auto& outs = ports_of(cells_[ci].kind).outputs;
      std::uint8_t op = 0;
      while (outs[op] != n.driver.port) ++op;
      NetRt rt;
      rt.name = n.driver.str();
      for (const auto& s : n.sinks) {
        const auto si = cell_index(s.cell);
        const auto& ins = ports_of(cells_[si].kind).inputs;
        std::uint8_t ip = 0;
        while (ins[ip] != s.port) ++ip;
        rt.sinks.push_back({si, ip});
      }
      cells_[ci].out[op] = static_cast<std::uint32_t>(nets_.size());
      net_by_name_.emplace(rt.name, static_cast<NetId>(nets_.size()));
      nets_.push_back(std::move(rt));
    }
  }

  std::uint64_t push(SimTime t, std::uint32_t target, EventKind k) {
    const auto s = serial_++;
    heap_.push({t, s, target, k});
    return s;
  }

  void emit(std::uint32_t net, SimTime t) {
    if (net != none) schedule(net, t);
  }

  SimTime edge_time(CellRt& c) {
    const std::int64_t nominal = c.phase.count() + c.edge * c.period.count();
    if (c.jitter.kind == JitterKind::None || c.jitter.amount_ps == 0) return SimTime::ticks(nominal);
    double j = 0;
    if (c.jitter.kind == JitterKind::Uniform) {
      j = (2.0 * c.rng.uniform() - 1.0) * c.jitter.amount_ps;
    } else {
      const double u1 = 1.0 - c.rng.uniform(), u2 = c.rng.uniform();
      j = c.jitter.amount_ps * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }
    const auto t = nominal + static_cast<std::int64_t>(std::llround(j * SimTime::ticks_per_ps));
    return SimTime::ticks(std::max<std::int64_t>(t, now_.count()));
  }

  void clock_tick(std::uint32_t ci, SimTime t) {
    auto& c = cells_[ci];
    deliver_net(c.out[0], t);
    ++c.edge;
    push(edge_time(c), ci, EventKind::ClockTick);
  }

  void deliver_net(std::uint32_t net, SimTime t) {
    const auto& n = nets_[net];
    if (n.slot != none) trace_.record(n.slot, t);
    for (const auto& s : n.sinks) deliver(s.cell, s.port, t);
  }

  void violation(const CellRt& c, std::string_view port, SimTime t) {
    ++stats_.protocol_violations;
    if (opt_.fatal_protocol_violations) {
      throw ProtocolViolation("pulse on armed input " + c.name + "." + std::string(port) + " at " +
                              t.fs_string() + " fs");
    }
  }

  void deliver(std::uint32_t ci, std::uint8_t port, SimTime t) {
    auto& c = cells_[ci];
    switch (c.kind) {
      case CellKind::Jtl: emit(c.out[0], t + c.delay); break;
      case CellKind::Splitter:
        emit(c.out[0], t + c.delay);
        emit(c.out[1], t + c.delay);
        break;
      case CellKind::CElement:
      case CellKind::DottedCElement: {
        bool& mine = port == 0 ? c.armed_a : c.armed_b;
        if (mine) {
          violation(c, port == 0 ? "a" : "b", t);
          break;
        }
        mine = true;
        if (c.armed_a && c.armed_b) {
          c.armed_a = c.armed_b = false;
          emit(c.out[0], t + c.delay);
        }
        break;
      }
      case CellKind::Dro:
        if (port == 0) {
          if (c.stored) {
            ++stats_.dro_double_data;
          } else {
            c.stored = true;
            c.arrival = t;
          }
        } else {
          dro_clock(ci, c, t);
        }
        break;
      case CellKind::Probe: trace_.record(c.slot, t); break;
      case CellKind::Source:
      case CellKind::ClockGen: break;
    }
  }

  void dro_clock(std::uint32_t ci, CellRt& c, SimTime t) {
    if (!c.stored) return;
    const double slack = static_cast<double>(t.count() - c.arrival.count()) / SimTime::ticks_per_ps;
    DroReadout r{ci, t, slack, false, c.deferred, SimTime{}};
    if (c.deferred || opt_.nominal_dro) {
      r.q = t + SimTime::ps(c.model.d_nom);
    } else if (auto d = c.model.clock_to_q(slack)) {
      r.q = t + SimTime::ps(*d);
    } else if (opt_.defer_mode == DeferMode::EmitLate) {
      ++stats_.dro_deferrals;
      r.q = t + opt_.late_delay;
    } else {
      ++stats_.dro_deferrals;
      c.deferred = true;
      r.deferred = true;
    }
    if (!r.deferred) {
      c.stored = c.deferred = false;
      ++stats_.dro_readouts;
      emit(c.out[0], r.q);
    }
    if (opt_.log_readouts) readouts_.push_back(r);
  }

  SimOptions opt_;
  std::vector<CellRt> cells_;
  std::vector<NetRt> nets_;
  std::unordered_map<std::string, std::uint32_t> cell_by_name_;
  std::unordered_map<std::string, NetId> net_by_name_;
  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> heap_;
  std::uint64_t serial_ = 0;
  SimTime now_{};
  SimStats stats_;
  std::vector<DroReadout> readouts_;
  Trace trace_;
};

}  // namespace sfq
