#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mouseleak {

enum class ErrorCode {
  FileNotFound,
  MalformedHeader,
  UnsupportedChannels,
  UnsupportedBitDepth,
  UnsupportedCodec,
  Io,
  InvalidArgument,
  IndexOutOfRange,
  EmptyInput,
  UnsortedInput,
  WidthMismatch,
  UnknownLabel,
  Schema,
  Indeterminate,
};

std::string_view to_string(ErrorCode code);

/// Every failure in the library surfaces as this exception. The code is
/// stable for programmatic handling; the message names the offending field.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mouseleak
