#ifndef DIFFGRAPH_ERROR_HPP_
#define DIFFGRAPH_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace diffgraph {

enum class ErrorCode {
  // malformed input
  MalformedInput,
  DuplicateVertex,
  DuplicateEdge,
  NonFiniteValue,
  NegativeWeight,
  SelfLoop,
  AsymmetricInput,
  UnknownVertex,
  NegativeKilling,
  NonPositiveMeasure,
  DimensionMismatch,
  InvalidArgument,
  InvalidExhaustion,
  // domain errors
  IsolatedUnkilledVertex,
  SizeLimit,
  NotOrderIso,
  NotConstantMultiplier,
  NotSuperharmonic,
  NotPositive,
  NotBijective,
  LpInfeasible,
  NotConnected,
  SearchBudgetExceeded,
  SingularSystem,
  HypothesisViolated,
};

inline constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedInput: return "MalformedInput";
    case ErrorCode::DuplicateVertex: return "DuplicateVertex";
    case ErrorCode::DuplicateEdge: return "DuplicateEdge";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::AsymmetricInput: return "AsymmetricInput";
    case ErrorCode::UnknownVertex: return "UnknownVertex";
    case ErrorCode::NegativeKilling: return "NegativeKilling";
    case ErrorCode::NonPositiveMeasure: return "NonPositiveMeasure";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidExhaustion: return "InvalidExhaustion";
    case ErrorCode::IsolatedUnkilledVertex: return "IsolatedUnkilledVertex";
    case ErrorCode::SizeLimit: return "SizeLimit";
    case ErrorCode::NotOrderIso: return "NotOrderIso";
    case ErrorCode::NotConstantMultiplier: return "NotConstantMultiplier";
    case ErrorCode::NotSuperharmonic: return "NotSuperharmonic";
    case ErrorCode::NotPositive: return "NotPositive";
    case ErrorCode::NotBijective: return "NotBijective";
    case ErrorCode::LpInfeasible: return "LpInfeasible";
    case ErrorCode::NotConnected: return "NotConnected";
    case ErrorCode::SearchBudgetExceeded: return "SearchBudgetExceeded";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::HypothesisViolated: return "HypothesisViolated";
  }
  return "Unknown";
}

/// True for codes that describe malformed input rather than a domain
/// condition; the CLI maps these to exit status 2.
inline constexpr bool is_input_error(ErrorCode code) {
  return code <= ErrorCode::InvalidExhaustion;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace diffgraph

#endif  // DIFFGRAPH_ERROR_HPP_
