#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace exch {

enum class ErrorCode {
  InvalidConfig,
  InvalidInput,
  ShapeMismatch,
  DimensionMismatch,
  FamilyMismatch,
  InsufficientSamples,
  InsufficientEnvironments,
  DegenerateDensity,
  NonPositiveDensity,
  Parse,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Domain error carrying a machine-readable code. All library failures are
/// reported through this type; the CLI maps it to exit status 2.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace exch
