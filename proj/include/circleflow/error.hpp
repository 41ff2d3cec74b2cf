#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace circleflow {

enum class ErrorCode {
  kInvalidInput,
  kNoBimodalStructure,
  kEmptyRoi,
  kDegenerateKernel,
  kSingularSystem,
  kNonFiniteLoss,
  kCalibrationFailed,
  kNoEdgeFound,
  kDivergentRestoration,
  kIo,
};

std::string_view error_code_name(ErrorCode code);

// All pipeline failures surface as this exception; the code is stable and is
// what the CLI reports in its JSON diagnostic.
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

inline void require(bool condition, const std::string& message) {
  if (!condition) fail(ErrorCode::kInvalidInput, message);
}

}  // namespace circleflow
