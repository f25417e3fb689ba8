#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sfq {

/// Raised by the event kernel for conditions that indicate a broken cell
/// behavior or a runaway circuit (scheduling in the past, event storms).
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A handshake rule was broken (e.g. a pulse on an already armed C-element
/// input) and the simulator was configured to treat that as fatal.
class ProtocolViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent configuration: calibration files, run options,
/// builder arguments.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ", col " + std::to_string(column) +
                           ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace sfq
