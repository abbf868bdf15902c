#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace starscat {

/// Failure categories. Each one has a stable exit code in the CLI.
enum class ErrorCategory {
  invalid_argument,
  domain_error,
  invalid_shape,
  solver_failure,
  invalid_grid,
  incomplete_data,
  unreliable_s,
  step_too_large,
  insufficient_bandwidth,
  invalid_iterate,
  input_not_found,
  parse_error,
  duplicate_coefficient,
  positivity_failure,
  non_converged,
};

constexpr std::string_view category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::invalid_argument: return "invalid-argument";
    case ErrorCategory::domain_error: return "domain-error";
    case ErrorCategory::invalid_shape: return "invalid-shape";
    case ErrorCategory::solver_failure: return "solver-failure";
    case ErrorCategory::invalid_grid: return "invalid-grid";
    case ErrorCategory::incomplete_data: return "incomplete-data";
    case ErrorCategory::unreliable_s: return "unreliable-s";
    case ErrorCategory::step_too_large: return "step-too-large";
    case ErrorCategory::insufficient_bandwidth: return "insufficient-bandwidth";
    case ErrorCategory::invalid_iterate: return "invalid-iterate";
    case ErrorCategory::input_not_found: return "input-not-found";
    case ErrorCategory::parse_error: return "parse-error";
    case ErrorCategory::duplicate_coefficient: return "duplicate-coefficient";
    case ErrorCategory::positivity_failure: return "positivity-failure";
    case ErrorCategory::non_converged: return "non-converged";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(std::string(category_name(category)) + ": " + message),
        category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

/// Solver breakdown; carries the reciprocal condition estimate of the system.
class SolverFailure : public Error {
 public:
  SolverFailure(const std::string& message, double rcond)
      : Error(ErrorCategory::solver_failure, message), rcond_(rcond) {}

  double rcond() const noexcept { return rcond_; }

 private:
  double rcond_;
};

[[noreturn]] inline void fail(ErrorCategory category, const std::string& message) {
  throw Error(category, message);
}

}  // namespace starscat
