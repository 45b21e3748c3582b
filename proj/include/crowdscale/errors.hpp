#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace crowdscale {

/// A time-step restriction was violated; the message names the constraint.
class CflError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Monokinetic density exceeded its ceiling (mass concentration).
class CausticError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Negative density or other loss of admissibility inside a solver.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Damped fixed-point iteration failed; carries the residual history.
class FixedPointError : public std::runtime_error {
 public:
  FixedPointError(const std::string& what, std::vector<double> residuals)
      : std::runtime_error(what), residuals_(std::move(residuals)) {}
  const std::vector<double>& residuals() const { return residuals_; }

 private:
  std::vector<double> residuals_;
};

/// Scenario or parameter validation failure; lists every violated rule.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> problems)
      : std::runtime_error(join(problems)), problems_(std::move(problems)) {}
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& p) {
    std::string s;
    for (const auto& x : p) {
      if (!s.empty()) s += "; ";
      s += x;
    }
    return s;
  }
  std::vector<std::string> problems_;
};

}  // namespace crowdscale
