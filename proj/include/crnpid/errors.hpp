#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace crnpid {

// Malformed network, unknown species, dimension mismatch, invalid parameters.
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message, const std::string& file = "")
      : std::runtime_error((file.empty() ? std::string() : file + ": ") + "line " + std::to_string(line) +
                           ", column " + std::to_string(column) + ": " + message),
        line_(line),
        column_(column),
        message_(message) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string& message() const noexcept { return message_; }

  ParseError in_file(const std::string& file) const { return ParseError(line_, column_, message_, file); }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string message_;
};

// Step-size underflow or non-finite state during integration.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(double time, const std::string& message)
      : std::runtime_error(message + " at t = " + std::to_string(time)),
        time_(time) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace crnpid
