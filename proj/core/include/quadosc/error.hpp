#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace quadosc {

enum class ErrorCode {
  // configuration
  parse_error,
  unknown_key,
  missing_section,
  invalid_config,
  // model / analysis
  invalid_argument,
  stalled,
  insufficient_edges,
  no_pairable_edges,
  non_positive_prediction,
  non_finite_objective,
  infeasible_observations,
  // data and files
  empty_trace,
  non_monotone_time,
  io,
};

enum class ErrorCategory { config, model, io };

ErrorCategory category(ErrorCode code);
std::string_view to_string(ErrorCode code);

/// Process exit code for a category: 2 config, 3 model, 4 io.
int exit_code(ErrorCategory cat);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace quadosc
