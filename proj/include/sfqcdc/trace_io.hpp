#pragma once

#include <algorithm>
#include <map>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include "kernel.hpp"

namespace sfq {

/// One line per pulse, `<name> <time-fs>`, sorted by (time, name). Times are
/// exact decimal femtoseconds (the kernel resolves 1 as).
inline void write_trace_text(std::ostream& os, const Trace& tr) {
  std::vector<std::pair<SimTime, const std::string*>> rows;
  rows.reserve(tr.total());
  for (const auto& n : tr.names())
    for (auto t : tr[n]) rows.emplace_back(t, &n);
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return std::tie(a.first, *a.second) < std::tie(b.first, *b.second); });
  for (const auto& [t, n] : rows) os << *n << ' ' << t.fs_string() << '\n';
}

/// Value-change dump: every pulse is a 1 followed by a 0 one femtosecond
/// later. Timescale is 1 as to keep the kernel's resolution.
inline void write_trace_vcd(std::ostream& os, const Trace& tr) {
  std::vector<std::string> names = tr.names();
  std::sort(names.begin(), names.end());
  auto ident = [](std::size_t i) {
    std::string s;
    do {
      s += static_cast<char>('!' + i % 94);
      i /= 94;
    } while (i);
    return s;
  };
  os << "$timescale 1as $end\n$scope module sfq $end\n";
  for (std::size_t i = 0; i < names.size(); ++i) os << "$var wire 1 " << ident(i) << ' ' << names[i] << " $end\n";
  os << "$upscope $end\n$enddefinitions $end\n";

  std::map<SimTime::rep, std::vector<std::pair<std::string, char>>> changes;
  for (std::size_t i = 0; i < names.size(); ++i) {
    for (auto t : tr[names[i]]) {
      changes[t.count()].emplace_back(ident(i), '1');
      changes[t.count() + SimTime::ticks_per_fs].emplace_back(ident(i), '0');
    }
  }
  os << "#0\n$dumpvars\n";
  for (std::size_t i = 0; i < names.size(); ++i) os << '0' << ident(i) << '\n';
  os << "$end\n";
  for (auto& [t, v] : changes) {
    std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.second < b.second; });  // 0 before 1
    os << '#' << t << '\n';
    for (const auto& [id, val] : v) os << val << id << '\n';
  }
}

}  // namespace sfq
