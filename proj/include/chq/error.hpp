#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace chq {

enum class ErrorCode {
  NonHermitianInput,
  SingularMetric,
  DimensionTooSmall,
  InvalidArgument,
  OutsideCone,
  OutsideGammaInfinity,
  OutsideConeTilde,
  OutsideGammaK,
  LevelOutOfRange,
  NotCodiagonalizable,
  HypothesisUnverifiable,
  BoundaryAccess,
  DegenerateGradient,
  NormalizationViolated,
  LinearSolveFailed,
  NewtonStalled,
  ConeEscape,
  PathStalled,
  ParseError,
  ValidationError,
  IoError,
};

constexpr std::string_view to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::NonHermitianInput: return "NonHermitianInput";
    case ErrorCode::SingularMetric: return "SingularMetric";
    case ErrorCode::DimensionTooSmall: return "DimensionTooSmall";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::OutsideCone: return "OutsideCone";
    case ErrorCode::OutsideGammaInfinity: return "OutsideGammaInfinity";
    case ErrorCode::OutsideConeTilde: return "OutsideConeTilde";
    case ErrorCode::OutsideGammaK: return "OutsideGammaK";
    case ErrorCode::LevelOutOfRange: return "LevelOutOfRange";
    case ErrorCode::NotCodiagonalizable: return "NotCodiagonalizable";
    case ErrorCode::HypothesisUnverifiable: return "HypothesisUnverifiable";
    case ErrorCode::BoundaryAccess: return "BoundaryAccess";
    case ErrorCode::DegenerateGradient: return "DegenerateGradient";
    case ErrorCode::NormalizationViolated: return "NormalizationViolated";
    case ErrorCode::LinearSolveFailed: return "LinearSolveFailed";
    case ErrorCode::NewtonStalled: return "NewtonStalled";
    case ErrorCode::ConeEscape: return "ConeEscape";
    case ErrorCode::PathStalled: return "PathStalled";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Library error carrying a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace chq
