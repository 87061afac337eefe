#include "steinlab/error.hpp"

namespace steinlab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnsupportedSpace: return "UnsupportedSpace";
    case ErrorCode::NonPositiveMargin: return "NonPositiveMargin";
    case ErrorCode::NonIntegrable: return "NonIntegrable";
    case ErrorCode::NegativeDensity: return "NegativeDensity";
    case ErrorCode::RejectionStall: return "RejectionStall";
    case ErrorCode::StepRejected: return "StepRejected";
    case ErrorCode::TruncationError: return "TruncationError";
    case ErrorCode::TailTooFat: return "TailTooFat";
    case ErrorCode::SinkhornDiverged: return "SinkhornDiverged";
    case ErrorCode::IdentityResidualHigh: return "IdentityResidualHigh";
    case ErrorCode::KernelUnavailable: return "KernelUnavailable";
    case ErrorCode::HypothesisViolated: return "HypothesisViolated";
    case ErrorCode::NonFiniteBound: return "NonFiniteBound";
    case ErrorCode::DivergentIntegral: return "DivergentIntegral";
    case ErrorCode::InversionFailed: return "InversionFailed";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::PresetUnsupported: return "PresetUnsupported";
    case ErrorCode::VarianceBlowup: return "VarianceBlowup";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

bool is_precondition_failure(ErrorCode code) {
  return code == ErrorCode::ConfigError || code == ErrorCode::HypothesisViolated ||
         code == ErrorCode::UnsupportedSpace || code == ErrorCode::PresetUnsupported ||
         code == ErrorCode::NonPositiveMargin;
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace steinlab
