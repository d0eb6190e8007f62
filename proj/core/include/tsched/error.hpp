#ifndef TSCHED_ERROR_HPP
#define TSCHED_ERROR_HPP

#include <stdexcept>
#include <string>

namespace tsched {

enum class ErrorCode {
  kDuplicateNode,
  kDuplicateLink,
  kUnknownNode,
  kUnknownLink,
  kInvalidCapacity,
  kInsufficientBandwidth,
  kUnknownRequest,
  kNoPath,
  kCannotSchedule,
  kUnknownOffer,
  kExpiredOffer,
  kPreconditionViolated,
  kScenarioInvalid,
  kInvariantViolated,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tsched

#endif
