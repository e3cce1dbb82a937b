#include "domcheck/error.hpp"

namespace domcheck {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::window_out_of_range: return "WindowOutOfRange";
    case ErrorKind::singular_generator: return "SingularGenerator";
    case ErrorKind::degenerate_splitting: return "DegenerateSplitting";
    case ErrorKind::dimension_mismatch: return "DimensionMismatch";
    case ErrorKind::vanishing_denominator: return "VanishingDenominator";
    case ErrorKind::invalid_m: return "InvalidM";
    case ErrorKind::lambda_out_of_range: return "LambdaOutOfRange";
    case ErrorKind::nesting_violation: return "NestingViolation";
    case ErrorKind::projector_invariant_violation: return "ProjectorInvariantViolation";
    case ErrorKind::certificate_mismatch: return "CertificateMismatch";
    case ErrorKind::precondition_failed: return "PreconditionFailed";
    case ErrorKind::unknown_model: return "UnknownModel";
    case ErrorKind::bad_params: return "BadParams";
    case ErrorKind::parse_error: return "ParseError";
  }
  return "Unknown";
}

}  // namespace domcheck
