#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace crossfire {

enum class ErrorCode {
  MalformedHeader,
  UnsupportedMaxval,
  TruncatedPixelData,
  UnsupportedEncoding,
  TruncatedData,
  UnknownFormat,
  IoFailure,
  OutOfRange,
  DegenerateNorm,
  DimMismatch,
  BadSpec,
  ShapeMismatch,
  EmptyText,
  UnmappedLabel,
  ModalityMismatch,
  OddDimsForDownsample,
  EmptyResults,
  IncompleteGrid,
  SchemaViolation,
  MissingFile,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported through this type; `code()` is stable,
// the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace crossfire
