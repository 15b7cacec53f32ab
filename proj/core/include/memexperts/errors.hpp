#pragma once

#include <stdexcept>
#include <string>

namespace memexperts {

// Invalid parameters or inconsistent configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A caller broke a documented precondition of an operation.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A learner read the loss of an expert it did not declare for the day,
// or played an expert outside its query set.
class QueryModelViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A composed learner's outer algorithm tracked more experts than allowed.
class SpaceModelViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A stream was asked for a day past its end.
class HorizonError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Interval or value outside its permitted range.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, long line, long column = 0)
      : std::runtime_error(format(what, line, column)), line_(line), column_(column) {}

  long line() const noexcept { return line_; }
  long column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& what, long line, long column) {
    std::string out = "line " + std::to_string(line);
    if (column > 0) out += ", column " + std::to_string(column);
    return out + ": " + what;
  }

  long line_;
  long column_;
};

}  // namespace memexperts
