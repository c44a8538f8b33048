#pragma once

#include <stdexcept>
#include <string>

namespace relaysel {

// Argument outside the domain of an operation (bad index, bad parameter).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or invalid input file. Carries the offending field and line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& field,
             const std::string& what)
      : std::runtime_error(format(file, line, field, what)),
        file_(file), line_(line), field_(field) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  static std::string format(const std::string& file, std::size_t line,
                            const std::string& field, const std::string& what) {
    std::string out = file;
    if (line > 0) out += ":" + std::to_string(line);
    if (!field.empty()) out += ": field '" + field + "'";
    out += ": " + what;
    return out;
  }

  std::string file_;
  std::size_t line_;
  std::string field_;
};

// Chain without a unique stationary distribution.
class ReducibleChainError : public std::runtime_error {
 public:
  ReducibleChainError(std::size_t state, const std::string& what)
      : std::runtime_error(what), state_(state) {}
  std::size_t state() const noexcept { return state_; }

 private:
  std::size_t state_;
};

// Numerical failure (singular factorisation, residual out of tolerance).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace relaysel
