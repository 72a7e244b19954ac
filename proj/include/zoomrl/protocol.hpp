#pragma once

// Multi-turn conversation protocol: prompt templates, the zoom-in tool call
// (JSON inside <tool_call> tags), the '<box>(x1,y1),(x2,y2)</box>' grammar,
// tool responses and final answers.

#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "zoomrl/error.hpp"
#include "zoomrl/geometry.hpp"

namespace zoomrl {

inline constexpr std::string_view kZoomToolName = "image_zoom_in_tool";
inline constexpr int kCoordinateDecimals = 6;

struct ToolCall {
  std::string name{kZoomToolName};
  int image_idx = 1;  // 1-based
  BBox bbox;
  std::optional<std::string> label;

  friend bool operator==(const ToolCall&, const ToolCall&) = default;
};

struct FinalAnswer {
  std::string text;
  friend bool operator==(const FinalAnswer&, const FinalAnswer&) = default;
};

struct AssistantTurn {
  std::string thought;
  std::variant<ToolCall, FinalAnswer> action;
  // Set when more than one <tool_call> block was present; only the first is used.
  bool extra_tool_calls_ignored = false;

  bool is_tool_call() const { return std::holds_alternative<ToolCall>(action); }
  const ToolCall& tool_call() const { return std::get<ToolCall>(action); }
  const FinalAnswer& final_answer() const { return std::get<FinalAnswer>(action); }
};

/// Either a parsed turn or the structured error explaining why not.
struct TurnParse {
  std::optional<AssistantTurn> turn;
  std::optional<ErrorCode> error;
  std::string error_message;

  bool ok() const { return turn.has_value(); }
};

std::string_view prompt_template_version();
const std::string& build_system_prompt();
std::string build_user_prompt(std::string_view question);

/// Throws Error with kMalformedBox, kOutOfRange or kEmptyBox.
BBox parse_bbox_string(std::string_view s);
std::string format_bbox_string(const BBox& box);

/// Throws Error (kMalformedToolCall, kUnknownTool, kEmptyTurn or a bbox code).
AssistantTurn parse_assistant_turn(std::string_view text);

/// Non-throwing form of parse_assistant_turn(); total over arbitrary bytes.
TurnParse try_parse_assistant_turn(std::string_view text) noexcept;

/// "<tool_response>\nImage {new_idx} (cropped from Image {source_idx}) is provided.\n</tool_response>"
/// Throws Error{kPrecondition} unless new_idx > source_idx >= 1.
std::string format_tool_response(int new_idx, int source_idx);

/// Full observation message: the image placeholder line followed by the
/// tool response, as laid out by the tool-response template.
std::string format_observation_message(int new_idx, int source_idx);

std::string format_tool_error(std::string_view message);

std::string serialize_tool_call(const ToolCall& tc);

/// thought, a newline, then the serialized call.
std::string serialize_turn(const AssistantTurn& turn);

}  // namespace zoomrl
