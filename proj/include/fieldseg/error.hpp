#pragma once

#include <stdexcept>
#include <string>

namespace fieldseg {

enum class ErrorCode {
  kIo,
  kBadMagic,
  kTruncated,
  kUnsupportedDtype,
  kWrongRecordKind,
  kHeaderOverflow,
  kInvariant,
  kDimensionMismatch,
  kInvalidArgument,
  kEmptyInput,
  kMissingPrediction,
  kPlacementFailed,
  kConfig,
};

const char* to_string(ErrorCode code) noexcept;

/// Single exception type for the library; the code distinguishes the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace fieldseg
