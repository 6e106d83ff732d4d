#pragma once

#include <stdexcept>
#include <string>

namespace slspec {

enum class ErrorCode {
  OutOfDomain,
  InvalidArgument,
  InvalidCoefficients,
  ToleranceNotMet,
  MismatchedStates,
  TruncationUnstable,
  RealAxis,
  HerglotzViolation,
  DegenerateNorm,
  RangeExceeded,
  WindowOutOfDomain,
  NonRealSolution,
  NonpositiveH,
  BeyondTruncation,
  InvalidTree,
  DomainOverflow,
  ParseError,
};

constexpr const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidCoefficients: return "InvalidCoefficients";
    case ErrorCode::ToleranceNotMet: return "ToleranceNotMet";
    case ErrorCode::MismatchedStates: return "MismatchedStates";
    case ErrorCode::TruncationUnstable: return "TruncationUnstable";
    case ErrorCode::RealAxis: return "RealAxis";
    case ErrorCode::HerglotzViolation: return "HerglotzViolation";
    case ErrorCode::DegenerateNorm: return "DegenerateNorm";
    case ErrorCode::RangeExceeded: return "RangeExceeded";
    case ErrorCode::WindowOutOfDomain: return "WindowOutOfDomain";
    case ErrorCode::NonRealSolution: return "NonRealSolution";
    case ErrorCode::NonpositiveH: return "NonpositiveH";
    case ErrorCode::BeyondTruncation: return "BeyondTruncation";
    case ErrorCode::InvalidTree: return "InvalidTree";
    case ErrorCode::DomainOverflow: return "DomainOverflow";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// True for failures of a numerical procedure, as opposed to bad input.
  bool is_numerical() const noexcept {
    switch (code_) {
      case ErrorCode::ToleranceNotMet:
      case ErrorCode::TruncationUnstable:
      case ErrorCode::HerglotzViolation:
      case ErrorCode::DegenerateNorm:
      case ErrorCode::RangeExceeded:
      case ErrorCode::NonpositiveH:
      case ErrorCode::DomainOverflow:
        return true;
      default:
        return false;
    }
  }

 private:
  ErrorCode code_;
};

}  // namespace slspec
