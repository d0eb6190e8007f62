#include "tsched/error.hpp"

namespace tsched {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDuplicateNode: return "DuplicateNode";
    case ErrorCode::kDuplicateLink: return "DuplicateLink";
    case ErrorCode::kUnknownNode: return "UnknownNode";
    case ErrorCode::kUnknownLink: return "UnknownLink";
    case ErrorCode::kInvalidCapacity: return "InvalidCapacity";
    case ErrorCode::kInsufficientBandwidth: return "InsufficientBandwidth";
    case ErrorCode::kUnknownRequest: return "UnknownRequest";
    case ErrorCode::kNoPath: return "NoPath";
    case ErrorCode::kCannotSchedule: return "CannotSchedule";
    case ErrorCode::kUnknownOffer: return "UnknownOffer";
    case ErrorCode::kExpiredOffer: return "ExpiredOffer";
    case ErrorCode::kPreconditionViolated: return "PreconditionViolated";
    case ErrorCode::kScenarioInvalid: return "ScenarioInvalid";
    case ErrorCode::kInvariantViolated: return "InvariantViolated";
  }
  return "Error";
}

}  // namespace tsched
