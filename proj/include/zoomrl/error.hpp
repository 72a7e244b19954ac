#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace zoomrl {

enum class ErrorCode {
  kDegenerateBox,
  kMalformedBox,
  kOutOfRange,
  kEmptyBox,
  kMalformedToolCall,
  kUnknownTool,
  kEmptyTurn,
  kBadImageIndex,
  kFewerThanTwoBoxes,
  kGroupTooSmall,
  kEmptyDataset,
  kSplitOverlap,
  kBadCheckpoint,
  kBadConfig,
  kPrecondition,
  kIo,
};

// Stable identifier, e.g. "MalformedBox". Used in error lines and JSON logs.
std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace zoomrl
