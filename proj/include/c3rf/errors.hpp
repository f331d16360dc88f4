#pragma once

#include <stdexcept>
#include <string>

namespace c3rf {

// Error taxonomy shared by all modules. The CLI maps these onto its stable
// exit codes: input/validation problems -> 2, inference failures -> 3,
// enumeration-cap violations -> 4.
enum class ErrorCode {
  duplicate_id,
  scope_out_of_range,
  table_size_mismatch,
  nan_potential,
  invalid_configuration,
  length_mismatch,
  dimension_mismatch,
  invalid_argument,
  all_configurations_forbidden,
  empty_ball,
  empty_candidate_set,
  non_convergence,
  too_large_to_enumerate,
  overflow,
  parse_error,
  file_not_found,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::duplicate_id: return "duplicate_id";
    case ErrorCode::scope_out_of_range: return "scope_out_of_range";
    case ErrorCode::table_size_mismatch: return "table_size_mismatch";
    case ErrorCode::nan_potential: return "nan_potential";
    case ErrorCode::invalid_configuration: return "invalid_configuration";
    case ErrorCode::length_mismatch: return "length_mismatch";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::all_configurations_forbidden: return "all_configurations_forbidden";
    case ErrorCode::empty_ball: return "empty_ball";
    case ErrorCode::empty_candidate_set: return "empty_candidate_set";
    case ErrorCode::non_convergence: return "non_convergence";
    case ErrorCode::too_large_to_enumerate: return "too_large_to_enumerate";
    case ErrorCode::overflow: return "overflow";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::file_not_found: return "file_not_found";
  }
  return "unknown";
}

}  // namespace c3rf
