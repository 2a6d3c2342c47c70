#pragma once

#include <stdexcept>
#include <string>

namespace gkdv {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad grid size, p <= 1, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A field or an intermediate quantity contains NaN or Inf.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// A functional is undefined for the given field (zero mass, vanishing energy).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// The time integrator produced non-finite values.
class BlowUpError : public Error {
 public:
  BlowUpError(const std::string& what, double time) : Error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Mass reached the periodic boundary; the run no longer models the whole line.
class GuardViolation : public Error {
 public:
  GuardViolation(const std::string& what, double time, double boundary_mass)
      : Error(what), time_(time), boundary_mass_(boundary_mass) {}
  double time() const noexcept { return time_; }
  double boundary_mass() const noexcept { return boundary_mass_; }

 private:
  double time_;
  double boundary_mass_;
};

/// Malformed or inconsistent experiment configuration. `line()` is 1-based,
/// 0 when the problem is not tied to a single line (e.g. a missing key).
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace gkdv
