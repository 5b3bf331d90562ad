#include "mouseleak/error.hpp"

namespace mouseleak {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::FileNotFound: return "file_not_found";
    case ErrorCode::MalformedHeader: return "malformed_header";
    case ErrorCode::UnsupportedChannels: return "unsupported_channels";
    case ErrorCode::UnsupportedBitDepth: return "unsupported_bit_depth";
    case ErrorCode::UnsupportedCodec: return "unsupported_codec";
    case ErrorCode::Io: return "io";
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::IndexOutOfRange: return "index_out_of_range";
    case ErrorCode::EmptyInput: return "empty_input";
    case ErrorCode::UnsortedInput: return "unsorted_input";
    case ErrorCode::WidthMismatch: return "width_mismatch";
    case ErrorCode::UnknownLabel: return "unknown_label";
    case ErrorCode::Schema: return "schema";
    case ErrorCode::Indeterminate: return "indeterminate";
  }
  return "unknown";
}

}  // namespace mouseleak
