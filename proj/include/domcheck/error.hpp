#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace domcheck {

enum class ErrorKind {
  window_out_of_range,
  singular_generator,
  degenerate_splitting,
  dimension_mismatch,
  vanishing_denominator,
  invalid_m,
  lambda_out_of_range,
  nesting_violation,
  projector_invariant_violation,
  certificate_mismatch,
  precondition_failed,
  unknown_model,
  bad_params,
  parse_error,
};

/// Stable machine-readable name, e.g. "WindowOutOfRange".
std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace domcheck
