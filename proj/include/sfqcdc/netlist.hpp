#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "error.hpp"
#include "time.hpp"
#include "timing_model.hpp"

namespace sfq {

enum class CellKind : std::uint8_t { Source, ClockGen, Jtl, Splitter, CElement, DottedCElement, Dro, Probe };

inline constexpr std::string_view kind_name(CellKind k) {
  switch (k) {
    case CellKind::Source: return "source";
    case CellKind::ClockGen: return "clock";
    case CellKind::Jtl: return "jtl";
    case CellKind::Splitter: return "splitter";
    case CellKind::CElement: return "c";
    case CellKind::DottedCElement: return "dc";
    case CellKind::Dro: return "dro";
    case CellKind::Probe: return "probe";
  }
  return "?";
}

inline std::optional<CellKind> kind_from_name(std::string_view s) {
  for (auto k : {CellKind::Source, CellKind::ClockGen, CellKind::Jtl, CellKind::Splitter, CellKind::CElement,
                 CellKind::DottedCElement, CellKind::Dro, CellKind::Probe})
    if (kind_name(k) == s) return k;
  return std::nullopt;
}

struct PortInfo {
  std::vector<std::string_view> inputs;
  std::vector<std::string_view> outputs;
};

/// Fixed port layout per kind. Port numbers used by the kernel are indices
/// into these lists (inputs and outputs numbered separately).
inline const PortInfo& ports_of(CellKind k) {
  static const PortInfo source{{}, {"out"}};
  static const PortInfo jtl{{"in"}, {"out"}};
  static const PortInfo spl{{"in"}, {"out0", "out1"}};
  static const PortInfo cel{{"a", "b"}, {"out"}};
  static const PortInfo dro{{"d", "clk"}, {"q"}};
  static const PortInfo probe{{"in"}, {}};
  switch (k) {
    case CellKind::Source:
    case CellKind::ClockGen: return source;
    case CellKind::Jtl: return jtl;
    case CellKind::Splitter: return spl;
    case CellKind::CElement:
    case CellKind::DottedCElement: return cel;
    case CellKind::Dro: return dro;
    case CellKind::Probe: return probe;
  }
  return probe;
}

enum class JitterKind : std::uint8_t { None, Uniform, Normal };

struct Jitter {
  JitterKind kind = JitterKind::None;
  double amount_ps = 0;  // half-width (uniform) or sigma (normal)
  std::uint64_t seed = 0;
  friend bool operator==(const Jitter&, const Jitter&) = default;
};

struct CellSpec {
  std::string name;
  CellKind kind = CellKind::Jtl;
  SimTime delay{};                // jtl, splitter, c, dc
  SimTime period{}, phase{};      // clock
  Jitter jitter{};                // clock
  std::vector<SimTime> times;     // source
  ClockToQModel model{};          // dro

  friend bool operator==(const CellSpec& a, const CellSpec& b) {
    if (a.name != b.name || a.kind != b.kind) return false;
    switch (a.kind) {
      case CellKind::Jtl:
      case CellKind::Splitter:
      case CellKind::CElement:
      case CellKind::DottedCElement: return a.delay == b.delay;
      case CellKind::ClockGen: return a.period == b.period && a.phase == b.phase && a.jitter == b.jitter;
      case CellKind::Source: return a.times == b.times;
      case CellKind::Dro:
        return a.model.d_nom == b.model.d_nom && a.model.delta_fail == b.model.delta_fail &&
               a.model.tau == b.model.tau && a.model.c == b.model.c;
      case CellKind::Probe: return true;
    }
    return false;
  }
};

struct PinRef {
  std::string cell;
  std::string port;
  std::string str() const { return cell + "." + port; }
  friend auto operator<=>(const PinRef&, const PinRef&) = default;
};

struct NetSpec {
  PinRef driver;
  std::vector<PinRef> sinks;
  friend bool operator==(const NetSpec&, const NetSpec&) = default;
};

class Netlist {
 public:
  std::vector<CellSpec> cells;
  std::vector<NetSpec> nets;

  CellSpec& add(CellSpec c) {
    if (index_.count(c.name)) throw ConfigError("duplicate cell name '" + c.name + "'");
    index_.emplace(c.name, cells.size());
    cells.push_back(std::move(c));
    return cells.back();
  }
  CellSpec& add(std::string name, CellKind kind, SimTime delay = {}) {
    CellSpec c;
    c.name = std::move(name);
    c.kind = kind;
    c.delay = delay;
    return add(std::move(c));
  }

  /// connect("A.out", {"B.in"})
  void connect(const std::string& driver, std::initializer_list<std::string> sinks) {
    NetSpec n;
    n.driver = split_pin(driver);
    for (const auto& s : sinks) n.sinks.push_back(split_pin(s));
    nets.push_back(std::move(n));
  }

  const CellSpec* find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    return it == index_.end() ? nullptr : &cells[it->second];
  }
  CellSpec* find(std::string_view name) {
    auto it = index_.find(std::string(name));
    return it == index_.end() ? nullptr : &cells[it->second];
  }
  std::size_t index_of(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) throw ConfigError("unknown cell '" + std::string(name) + "'");
    return it->second;
  }

  std::size_t count(CellKind k) const {
    std::size_t n = 0;
    for (const auto& c : cells) n += c.kind == k;
    return n;
  }

  static PinRef split_pin(const std::string& s) {
    auto dot = s.rfind('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == s.size())
      throw ConfigError("pin '" + s + "' must look like cell.port");
    return {s.substr(0, dot), s.substr(dot + 1)};
  }

  /// Single driver per net and per sink pin, explicit fanout (extra sinks
  /// allowed only when they are probes), valid ports and parameters.
  void validate() const {
    std::set<PinRef> drivers, driven;
    for (const auto& n : nets) {
      check_pin(n.driver, false);
      if (!drivers.insert(n.driver).second) throw ConfigError("pin " + n.driver.str() + " drives more than one net");
      if (n.sinks.empty()) throw ConfigError("net from " + n.driver.str() + " has no sink");
      std::size_t logic_sinks = 0;
      for (const auto& s : n.sinks) {
        check_pin(s, true);
        if (!driven.insert(s).second) throw ConfigError("pin " + s.str() + " has more than one driver");
        logic_sinks += find(s.cell)->kind != CellKind::Probe;
      }
      if (logic_sinks > 1) throw ConfigError("net from " + n.driver.str() + " fans out without a splitter");
    }
    for (const auto& c : cells) {
      switch (c.kind) {
        case CellKind::Jtl:
        case CellKind::Splitter:
        case CellKind::CElement:
        case CellKind::DottedCElement:
          if (c.delay.count() <= 0) throw ConfigError("cell '" + c.name + "': delay must be positive");
          break;
        case CellKind::ClockGen:
          if (c.period.count() <= 0) throw ConfigError("cell '" + c.name + "': period must be positive");
          if (c.phase >= c.period) throw ConfigError("cell '" + c.name + "': phase must be below the period");
          if (c.jitter.kind != JitterKind::None && !(c.jitter.amount_ps >= 0))
            throw ConfigError("cell '" + c.name + "': jitter amount must be non-negative");
          break;
        case CellKind::Dro: c.model.validate(); break;
        default: break;
      }
    }
  }

  friend bool operator==(const Netlist& a, const Netlist& b) { return a.cells == b.cells && a.nets == b.nets; }

 private:
  void check_pin(const PinRef& p, bool input) const {
    const CellSpec* c = find(p.cell);
    if (!c) throw ConfigError("unknown cell '" + p.cell + "'");
    const auto& ports = input ? ports_of(c->kind).inputs : ports_of(c->kind).outputs;
    for (auto name : ports)
      if (name == p.port) return;
    throw ConfigError("cell '" + p.cell + "' (" + std::string(kind_name(c->kind)) + ") has no " +
                      (input ? "input" : "output") + " port '" + p.port + "'");
  }

  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace sfq
