#pragma once

// Netlist text format (see docs/netlist_format.md):
//
//   # comment
//   cells:
//     J1 jtl delay=3
//     CLK clock period=33.333333 phase=0
//     X1 dro d_nom=8.1 delta_fail=0.4989 tau=2.18 c=1.466
//   nets:
//     CLK.out -> J1.in
//     J1.out -> X1.clk, P.in

#include <charconv>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "netlist.hpp"

namespace sfq {

namespace detail {

inline std::string fmt_double(double x) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);  // shortest round-trip form
  return std::string(buf, p);
}

struct Token {
  std::string text;
  std::size_t col;  // 1-based
};

inline std::vector<Token> tokenize(const std::string& line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    const std::size_t b = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    out.push_back({line.substr(b, i - b), b + 1});
  }
  return out;
}

}  // namespace detail

inline std::string serialize(const Netlist& nl) {
  using detail::fmt_double;
  std::ostringstream o;
  o << "cells:\n";
  for (const auto& c : nl.cells) {
    o << "  " << c.name << ' ' << kind_name(c.kind);
    switch (c.kind) {
      case CellKind::Jtl:
      case CellKind::Splitter:
      case CellKind::CElement:
      case CellKind::DottedCElement: o << " delay=" << c.delay.ps_string(); break;
      case CellKind::ClockGen:
        o << " period=" << c.period.ps_string() << " phase=" << c.phase.ps_string();
        if (c.jitter.kind != JitterKind::None) {
          o << " jitter=" << (c.jitter.kind == JitterKind::Uniform ? "uniform:" : "normal:")
            << fmt_double(c.jitter.amount_ps) << " seed=" << c.jitter.seed;
        }
        break;
      case CellKind::Source:
        if (!c.times.empty()) {
          o << " at=";
          for (std::size_t i = 0; i < c.times.size(); ++i) o << (i ? "," : "") << c.times[i].ps_string();
        }
        break;
      case CellKind::Dro:
        o << " d_nom=" << fmt_double(c.model.d_nom) << " delta_fail=" << fmt_double(c.model.delta_fail)
          << " tau=" << fmt_double(c.model.tau) << " c=" << fmt_double(c.model.c);
        break;
      case CellKind::Probe: break;
    }
    o << '\n';
  }
  o << "nets:\n";
  for (const auto& n : nl.nets) {
    o << "  " << n.driver.str() << " ->";
    for (std::size_t i = 0; i < n.sinks.size(); ++i) o << (i ? ", " : " ") << n.sinks[i].str();
    o << '\n';
  }
  return o.str();
}

inline Netlist parse_netlist(std::string_view text) {
  Netlist nl;
  enum { None, Cells, Nets } section = None;
  std::set<PinRef> drivers, driven;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t ln = 0;

  auto number = [&](const detail::Token& t, std::string_view v) {
    double x = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc{} || p != v.data() + v.size()) throw ParseError(ln, t.col, "bad number '" + std::string(v) + "'");
    return x;
  };
  auto time = [&](const detail::Token& t, std::string_view v) {
    try {
      return SimTime::parse_ps(v);
    } catch (const std::exception& e) {
      throw ParseError(ln, t.col, e.what());
    }
  };

  while (std::getline(in, line)) {
    ++ln;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    auto toks = detail::tokenize(line);
    if (toks.empty()) continue;
    if (toks.size() == 1 && toks[0].text == "cells:") {
      section = Cells;
      continue;
    }
    if (toks.size() == 1 && toks[0].text == "nets:") {
      section = Nets;
      continue;
    }
    if (section == None) throw ParseError(ln, toks[0].col, "expected 'cells:' or 'nets:'");

    if (section == Cells) {
      if (toks.size() < 2) throw ParseError(ln, toks[0].col, "cell line needs a name and a kind");
      CellSpec c;
      c.name = toks[0].text;
      if (c.name.find('.') != std::string::npos) throw ParseError(ln, toks[0].col, "cell names may not contain '.'");
      const auto k = kind_from_name(toks[1].text);
      if (!k) throw ParseError(ln, toks[1].col, "unknown cell kind '" + toks[1].text + "'");
      c.kind = *k;
      std::set<std::string> seen;
      for (std::size_t i = 2; i < toks.size(); ++i) {
        const auto& t = toks[i];
        const auto eq = t.text.find('=');
        if (eq == std::string::npos || eq == 0) throw ParseError(ln, t.col, "expected param=value");
        const std::string key = t.text.substr(0, eq);
        const std::string_view val = std::string_view(t.text).substr(eq + 1);
        if (!seen.insert(key).second) throw ParseError(ln, t.col, "duplicate parameter '" + key + "'");
        bool ok = true;
        switch (c.kind) {
          case CellKind::Jtl:
          case CellKind::Splitter:
          case CellKind::CElement:
          case CellKind::DottedCElement:
            if (key == "delay") c.delay = time(t, val);
            else ok = false;
            break;
          case CellKind::ClockGen:
            if (key == "period") c.period = time(t, val);
            else if (key == "phase") c.phase = time(t, val);
            else if (key == "seed") {
              auto [p, ec] = std::from_chars(val.data(), val.data() + val.size(), c.jitter.seed);
              if (ec != std::errc{} || p != val.data() + val.size()) throw ParseError(ln, t.col, "bad seed");
            }
            else if (key == "jitter") {
              const auto colon = val.find(':');
              const auto kind = val.substr(0, colon);
              if (kind == "uniform") c.jitter.kind = JitterKind::Uniform;
              else if (kind == "normal") c.jitter.kind = JitterKind::Normal;
              else if (kind == "none") c.jitter.kind = JitterKind::None;
              else throw ParseError(ln, t.col, "jitter must be uniform:<ps>, normal:<ps> or none");
              if (c.jitter.kind != JitterKind::None) {
                if (colon == std::string_view::npos) throw ParseError(ln, t.col, "jitter needs an amount");
                c.jitter.amount_ps = number(t, val.substr(colon + 1));
              }
            } else ok = false;
            break;
          case CellKind::Source:
            if (key == "at") {
              std::size_t b = 0;
              while (b <= val.size()) {
                auto e = val.find(',', b);
                if (e == std::string_view::npos) e = val.size();
                c.times.push_back(time(t, val.substr(b, e - b)));
                b = e + 1;
              }
            } else ok = false;
            break;
          case CellKind::Dro:
            if (key == "d_nom") c.model.d_nom = number(t, val);
            else if (key == "delta_fail") c.model.delta_fail = number(t, val);
            else if (key == "tau") c.model.tau = number(t, val);
            else if (key == "c") c.model.c = number(t, val);
            else ok = false;
            break;
          case CellKind::Probe: ok = false; break;
        }
        if (!ok) throw ParseError(ln, t.col, "unknown parameter '" + key + "' for " + std::string(kind_name(c.kind)));
      }
      auto need = [&](const char* key) {
        if (!seen.count(key))
          throw ParseError(ln, toks[1].col, std::string(kind_name(c.kind)) + " needs " + key + "=");
      };
      switch (c.kind) {
        case CellKind::Jtl:
        case CellKind::Splitter:
        case CellKind::CElement:
        case CellKind::DottedCElement: need("delay"); break;
        case CellKind::ClockGen: need("period"); break;
        case CellKind::Dro:
          need("d_nom"), need("delta_fail"), need("tau"), need("c");
          break;
        default: break;
      }
      if (nl.find(c.name)) throw ParseError(ln, toks[0].col, "duplicate cell name '" + c.name + "'");
      nl.add(std::move(c));
      continue;
    }

    // nets:  driver.port -> sink.port[, sink.port ...]
    if (toks.size() < 3 || toks[1].text != "->")
      throw ParseError(ln, toks[0].col, "expected 'cell.port -> cell.port[, ...]'");
    auto pin = [&](const detail::Token& t, std::string s, bool input) {
      PinRef p;
      try {
        p = Netlist::split_pin(s);
      } catch (const ConfigError& e) {
        throw ParseError(ln, t.col, e.what());
      }
      const CellSpec* c = nl.find(p.cell);
      if (!c) throw ParseError(ln, t.col, "unknown cell '" + p.cell + "'");
      const auto& ports = input ? ports_of(c->kind).inputs : ports_of(c->kind).outputs;
      bool found = false;
      for (auto n : ports) found |= n == p.port;
      if (!found)
        throw ParseError(ln, t.col, "'" + p.cell + "' has no " + (input ? "input" : "output") + " port '" + p.port + "'");
      return p;
    };
    NetSpec n;
    n.driver = pin(toks[0], toks[0].text, false);
    if (!drivers.insert(n.driver).second) throw ParseError(ln, toks[0].col, n.driver.str() + " already drives a net");
    const std::size_t arrow = line.find("->");
    std::size_t b = arrow + 2;
    while (b <= line.size()) {
      auto e = line.find(',', b);
      if (e == std::string::npos) e = line.size();
      const std::size_t s0 = line.find_first_not_of(" \t\r", b);
      std::size_t s1 = e;
      while (s1 > b && (line[s1 - 1] == ' ' || line[s1 - 1] == '\t' || line[s1 - 1] == '\r')) --s1;
      const detail::Token tk{s0 == std::string::npos || s0 >= e ? std::string{} : line.substr(s0, s1 - s0),
                             (s0 == std::string::npos ? b : s0) + 1};
      if (tk.text.empty()) throw ParseError(ln, tk.col, "empty sink");
      auto p = pin(tk, tk.text, true);
      if (!driven.insert(p).second) throw ParseError(ln, tk.col, p.str() + " has more than one driver");
      n.sinks.push_back(std::move(p));
      b = e + 1;
    }
    nl.nets.push_back(std::move(n));
    try {
      std::size_t logic = 0;
      for (const auto& s : nl.nets.back().sinks) logic += nl.find(s.cell)->kind != CellKind::Probe;
      if (logic > 1) throw ConfigError("fanout without a splitter");
    } catch (const ConfigError& e) {
      throw ParseError(ln, toks[0].col, e.what());
    }
  }
  try {
    nl.validate();
  } catch (const ConfigError& e) {
    throw ParseError(ln, 1, e.what());
  }
  return nl;
}

}  // namespace sfq
