#ifndef CALIB_ERROR_HPP_
#define CALIB_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace calib {

enum class ErrorCode {
  // geometry / bookkeeping
  kInvalidArgument,
  kFrameMismatch,
  kNotARotation,
  kNonFinite,
  // numerical failures
  kDegenerateGeometry,
  kNoCorrespondences,
  kEmptyInput,
  kInconsistentFrames,
  kInsufficientPoints,
  kNoConsensus,
  kParallelLines,
  kBoardRejected,
  kTooSparse,
  kBehindCamera,
  kDegenerateConfiguration,
  kNoConvergence,
  // I/O and configuration
  kMalformed,
  kUnsupportedEncoding,
  kMissingField,
  kWrongArity,
  kNonFiniteValue,
  kInvalidConfig,
  kIo,
};

std::string_view to_string(ErrorCode code) noexcept;

/// True for failures of the numerics (degenerate input, no consensus, ...)
/// as opposed to malformed input or bad configuration. The CLI maps the
/// former to exit code 2 and the latter to exit code 1.
bool is_numerical(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  /// The message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace calib

#endif  // CALIB_ERROR_HPP_
