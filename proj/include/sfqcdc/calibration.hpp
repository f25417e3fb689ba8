#pragma once

// Calibration file: `key = value` lines, `#` comments. Times in ps, areas in
// μm². Unknown keys are rejected so typos do not silently fall back to
// defaults. See examples_cfg/calibration.cfg for the shipped values.

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "netlist.hpp"
#include "time.hpp"
#include "timing_model.hpp"

namespace sfq {

inline constexpr const char* calibration_env_var = "SFQCDC_CALIBRATION";

struct CellDelays {
  SimTime jtl = SimTime::parse_ps("3");           // generic isolation JTL
  SimTime splitter = SimTime::parse_ps("0.73");
  SimTime c = SimTime::parse_ps("5");              // plain and dotted C-element
  SimTime clock_leaf = SimTime::parse_ps("1.54");  // read clock → sync DRO clk
  SimTime valid_jtl = SimTime::parse_ps("1.27");   // SPL_O → VALID_OUT
  SimTime sync_link = SimTime::parse_ps("9.36");   // sync DRO q → next sync DRO d
  SimTime token_jtl = SimTime::parse_ps("10");     // forward token between stages
};

struct AreaTable {
  std::map<CellKind, double> per_cell = {
      {CellKind::CElement, 1.982}, {CellKind::DottedCElement, 1.982}, {CellKind::Dro, 9.64},
      {CellKind::Splitter, 2.5},   {CellKind::Jtl, 3.49},            {CellKind::Source, 0.0},
      {CellKind::ClockGen, 0.0},   {CellKind::Probe, 0.0}};
  int jtl_jj = 2;
};

struct Calibration {
  // In-circuit DRO law driving every simulated DRO.
  ClockToQModel dro{8.1, 0.4989, 2.18, 1.466};
  // Stand-alone D-element characterization (setup/clock-to-Q curve).
  double char_d_nom = 8.1;
  double char_delta_fail = 1.7;
  std::vector<Anchor> char_anchors = {{2.1, 8.91}, {1.8, 18.0}};
  CellDelays delay;
  AreaTable area;

  ClockToQModel characterization() const { return fit_from_anchors(char_anchors, char_delta_fail, char_d_nom); }

  static Calibration defaults() { return {}; }

  static Calibration parse(std::string_view text) {
    Calibration cal;
    std::optional<std::vector<Anchor>> dro_anchors;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
      const auto eq = line.find('=');
      const auto key = trim(line.substr(0, eq == std::string::npos ? line.size() : eq));
      if (key.empty() && eq == std::string::npos) continue;
      if (eq == std::string::npos || key.empty()) throw ParseError(lineno, 1, "expected key = value");
      const auto val = trim(line.substr(eq + 1));
      const std::size_t col = line.find_first_not_of(" \t", eq + 1) + 1;
      try {
        cal.set(key, val, dro_anchors);
      } catch (const ParseError&) {
        throw;
      } catch (const std::exception& e) {
        throw ParseError(lineno, col, key + ": " + e.what());
      }
    }
    if (dro_anchors) cal.dro = fit_from_anchors(*dro_anchors, cal.dro.delta_fail, cal.dro.d_nom);
    cal.dro.validate();
    cal.characterization();  // surfaces bad anchors early
    return cal;
  }

  static Calibration load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open calibration file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    try {
      return parse(ss.str());
    } catch (const ParseError& e) {
      throw ConfigError(path + ": " + e.what());
    }
  }

  /// Explicit path, else $SFQCDC_CALIBRATION, else built-in defaults.
  static Calibration resolve(const std::string& path) {
    if (!path.empty()) return load(path);
    if (const char* env = std::getenv(calibration_env_var); env && *env) return load(env);
    return defaults();
  }

  std::string serialize() const {
    std::ostringstream o;
    o.precision(17);
    o << "dro.d_nom = " << dro.d_nom << "\n"
      << "dro.delta_fail = " << dro.delta_fail << "\n"
      << "dro.tau = " << dro.tau << "\n"
      << "dro.c = " << dro.c << "\n"
      << "char.d_nom = " << char_d_nom << "\n"
      << "char.delta_fail = " << char_delta_fail << "\n"
      << "char.anchors = " << anchors_string(char_anchors) << "\n";
    for (const auto& [k, t] : delay_fields()) o << "delay." << k << " = " << t->ps_string() << "\n";
    for (const auto& [k, v] : area.per_cell) o << "area." << kind_name(k) << " = " << v << "\n";
    o << "jj.jtl = " << area.jtl_jj << "\n";
    return o.str();
  }

 private:
  static std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  static double number(const std::string& v) {
    double x = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc{} || p != v.data() + v.size()) throw std::invalid_argument("not a number: '" + v + "'");
    return x;
  }

  static std::vector<Anchor> anchors(const std::string& v) {
    std::vector<Anchor> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      const auto colon = item.find(':');
      if (colon == std::string::npos) throw std::invalid_argument("anchor must be slack:delay");
      out.push_back({number(trim(item.substr(0, colon))), number(trim(item.substr(colon + 1)))});
    }
    return out;
  }

  static std::string anchors_string(const std::vector<Anchor>& a) {
    std::ostringstream o;
    o.precision(17);
    for (std::size_t i = 0; i < a.size(); ++i) o << (i ? ", " : "") << a[i].delta << ":" << a[i].delay;
    return o.str();
  }

  std::vector<std::pair<const char*, const SimTime*>> delay_fields() const {
    return {{"jtl", &delay.jtl},           {"splitter", &delay.splitter},   {"c", &delay.c},
            {"clock_leaf", &delay.clock_leaf}, {"valid_jtl", &delay.valid_jtl}, {"sync_link", &delay.sync_link},
            {"token_jtl", &delay.token_jtl}};
  }

  void set(const std::string& key, const std::string& v, std::optional<std::vector<Anchor>>& dro_anchors) {
    if (key == "dro.d_nom") dro.d_nom = number(v);
    else if (key == "dro.delta_fail") dro.delta_fail = number(v);
    else if (key == "dro.tau") dro.tau = number(v);
    else if (key == "dro.c") dro.c = number(v);
    else if (key == "dro.anchors") dro_anchors = anchors(v);
    else if (key == "char.d_nom") char_d_nom = number(v);
    else if (key == "char.delta_fail") char_delta_fail = number(v);
    else if (key == "char.anchors") char_anchors = anchors(v);
    else if (key == "jj.jtl") {
      const double x = number(v);
      if (x < 0 || x != static_cast<int>(x)) throw std::invalid_argument("JJ count must be a non-negative integer");
      area.jtl_jj = static_cast<int>(x);
    } else if (key.rfind("delay.", 0) == 0) {
      for (const auto& [k, t] : delay_fields()) {
        if (key.substr(6) == k) {
          const SimTime parsed = SimTime::parse_ps(v);
          if (parsed.count() <= 0) throw std::invalid_argument("delay must be positive");
          *const_cast<SimTime*>(t) = parsed;
          return;
        }
      }
      throw std::invalid_argument("unknown key");
    } else if (key.rfind("area.", 0) == 0) {
      const auto k = kind_from_name(key.substr(5));
      if (!k) throw std::invalid_argument("unknown cell kind");
      const double x = number(v);
      if (x < 0) throw std::invalid_argument("area must be non-negative");
      area.per_cell[*k] = x;
    } else {
      throw std::invalid_argument("unknown key");
    }
  }
};

}  // namespace sfq
