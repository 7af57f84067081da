#pragma once

#include <stdexcept>
#include <string>

namespace qclab {

enum class ErrorCode {
  OutOfRange,
  ArityMismatch,
  InvalidArgument,
  ZeroConditioningMass,
  NotARefinement,
  MalformedTree,
  UnknownNode,
  CapExceeded,
  Unachievable,
  HypothesisViolated,
  InnerComplexityZero,
  ParseError,
  IoError,
};

const char* error_code_name(ErrorCode code);

class QclabError : public std::runtime_error {
 public:
  QclabError(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code), message_(message) {}

  ErrorCode code() const noexcept { return code_; }
  /// The message without the error-code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) { throw QclabError(code, message); }

}  // namespace qclab
