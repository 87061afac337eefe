#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace steinlab {

enum class ErrorCode {
  UnsupportedSpace,
  NonPositiveMargin,
  NonIntegrable,
  NegativeDensity,
  RejectionStall,
  StepRejected,
  TruncationError,
  TailTooFat,
  SinkhornDiverged,
  IdentityResidualHigh,
  KernelUnavailable,
  HypothesisViolated,
  NonFiniteBound,
  DivergentIntegral,
  InversionFailed,
  StepTooLarge,
  PresetUnsupported,
  VarianceBlowup,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

// Configuration and hypothesis failures map to exit code 3, everything else to 2.
bool is_precondition_failure(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace steinlab
