#include "coopgrid/error.h"

namespace coopgrid {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNonPositiveDefiniteShape:
      return "NonPositiveDefiniteShape";
    case ErrorCode::kTariffArbitrage:
      return "TariffArbitrage";
    case ErrorCode::kEmptyBudget:
      return "EmptyBudget";
    case ErrorCode::kBoundsInverted:
      return "BoundsInverted";
    case ErrorCode::kDimensionMismatch:
      return "DimensionMismatch";
    case ErrorCode::kInvalidValue:
      return "InvalidValue";
    case ErrorCode::kTooManyPlayers:
      return "TooManyPlayers";
    case ErrorCode::kEmptyCoalition:
      return "EmptyCoalition";
    case ErrorCode::kModeMismatch:
      return "ModeMismatch";
    case ErrorCode::kNotPositiveDefinite:
      return "NotPositiveDefinite";
    case ErrorCode::kInfeasible:
      return "Infeasible";
    case ErrorCode::kUnbounded:
      return "Unbounded";
    case ErrorCode::kSolverFailure:
      return "SolverFailure";
    case ErrorCode::kIterLimit:
      return "IterLimit";
    case ErrorCode::kParseError:
      return "ParseError";
    case ErrorCode::kValidationError:
      return "ValidationError";
  }
  return "Unknown";
}

}  // namespace coopgrid
