#pragma once

#include <stdexcept>
#include <string>

namespace teleop {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition (non-unit quaternion, bad size, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A shared-control operation was invoked in the wrong mode.
class ModeViolation : public Error {
 public:
  using Error::Error;
};

/// Every finalist of a grasp selection failed inverse kinematics.
class NoFeasibleGrasp : public Error {
 public:
  using Error::Error;
};

/// A file or message could not be parsed. `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace teleop
