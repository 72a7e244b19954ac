#include "zoomrl/error.hpp"

namespace zoomrl {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDegenerateBox: return "DegenerateBox";
    case ErrorCode::kMalformedBox: return "MalformedBox";
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kEmptyBox: return "EmptyBox";
    case ErrorCode::kMalformedToolCall: return "MalformedToolCall";
    case ErrorCode::kUnknownTool: return "UnknownTool";
    case ErrorCode::kEmptyTurn: return "EmptyTurn";
    case ErrorCode::kBadImageIndex: return "BadImageIndex";
    case ErrorCode::kFewerThanTwoBoxes: return "FewerThanTwoBoxes";
    case ErrorCode::kGroupTooSmall: return "GroupTooSmall";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kSplitOverlap: return "SplitOverlap";
    case ErrorCode::kBadCheckpoint: return "BadCheckpoint";
    case ErrorCode::kBadConfig: return "BadConfig";
    case ErrorCode::kPrecondition: return "Precondition";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

}  // namespace zoomrl
