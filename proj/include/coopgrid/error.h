#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace coopgrid {

enum class ErrorCode {
  kNonPositiveDefiniteShape,
  kTariffArbitrage,
  kEmptyBudget,
  kBoundsInverted,
  kDimensionMismatch,
  kInvalidValue,
  kTooManyPlayers,
  kEmptyCoalition,
  kModeMismatch,
  kNotPositiveDefinite,
  kInfeasible,
  kUnbounded,
  kSolverFailure,
  kIterLimit,
  kParseError,
  kValidationError,
};

std::string_view error_code_name(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace coopgrid
