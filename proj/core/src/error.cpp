#include "quadosc/error.hpp"

namespace quadosc {

ErrorCategory category(ErrorCode code) {
  switch (code) {
    case ErrorCode::parse_error:
    case ErrorCode::unknown_key:
    case ErrorCode::missing_section:
    case ErrorCode::invalid_config:
      return ErrorCategory::config;
    case ErrorCode::empty_trace:
    case ErrorCode::non_monotone_time:
    case ErrorCode::io:
      return ErrorCategory::io;
    default:
      return ErrorCategory::model;
  }
}

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::parse_error: return "ParseError";
    case ErrorCode::unknown_key: return "UnknownKey";
    case ErrorCode::missing_section: return "MissingSection";
    case ErrorCode::invalid_config: return "InvalidConfig";
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::stalled: return "Stalled";
    case ErrorCode::insufficient_edges: return "InsufficientEdges";
    case ErrorCode::no_pairable_edges: return "NoPairableEdges";
    case ErrorCode::non_positive_prediction: return "NonPositivePrediction";
    case ErrorCode::non_finite_objective: return "NonFiniteObjective";
    case ErrorCode::infeasible_observations: return "InfeasibleObservations";
    case ErrorCode::empty_trace: return "EmptyTrace";
    case ErrorCode::non_monotone_time: return "NonMonotoneTime";
    case ErrorCode::io: return "IOError";
  }
  return "Unknown";
}

int exit_code(ErrorCategory cat) {
  switch (cat) {
    case ErrorCategory::config: return 2;
    case ErrorCategory::model: return 3;
    case ErrorCategory::io: return 4;
  }
  return 1;
}

}  // namespace quadosc
