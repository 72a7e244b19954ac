#include "zoomrl/protocol.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <climits>
#include <cstring>
#include <string>

#include "json.hpp"
#include "zoomrl/prompt_assets.hpp"

namespace zoomrl {

namespace {

constexpr std::string_view kToolCallOpen = "<tool_call>";
constexpr std::string_view kToolCallClose = "</tool_call>";
constexpr int kMaxJsonDepth = 32;

bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_ascii_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_ascii_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string replace_all(std::string text, std::string_view key, std::string_view value) {
  for (std::size_t pos = text.find(key); pos != std::string::npos;
       pos = text.find(key, pos + value.size())) {
    text.replace(pos, key.size(), value);
  }
  return text;
}

class BoxScanner {
 public:
  explicit BoxScanner(std::string_view s) : s_(s) {}

  void skip_ws() {
    while (pos_ < s_.size() && is_ascii_space(s_[pos_])) ++pos_;
  }

  void expect(std::string_view token) {
    skip_ws();
    if (s_.substr(pos_, token.size()) != token) fail("expected '" + std::string(token) + "'");
    pos_ += token.size();
  }

  double number() {
    skip_ws();
    const std::size_t start = pos_;
    if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
    const std::size_t digits_start = pos_;
    std::size_t digits = 0;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_, ++digits;
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      std::size_t frac = 0;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_, ++frac;
      if (frac == 0) fail("expected digits after '.'");
      digits += frac;
    }
    if (digits == 0) fail("expected a decimal number");
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < s_.size() && (s_[p] == '+' || s_[p] == '-')) ++p;
      std::size_t exp_digits = 0;
      while (p < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p]))) ++p, ++exp_digits;
      if (exp_digits == 0) fail("malformed exponent");
      pos_ = p;
    }
    double value = 0.0;
    const char* first = s_.data() + digits_start;
    const char* last = s_.data() + pos_;
    // from_chars rejects a leading '.'.
    std::string buf;
    if (*first == '.') {
      buf = "0" + std::string(first, last);
      first = buf.data();
      last = buf.data() + buf.size();
    }
    const auto res = std::from_chars(first, last, value);
    if (res.ec == std::errc::result_out_of_range) {
      throw Error(ErrorCode::kOutOfRange, "coordinate magnitude out of range");
    }
    if (res.ec != std::errc() || res.ptr != last) fail("unparseable number");
    return s_[start] == '-' ? -value : value;
  }

  void expect_end() {
    skip_ws();
    if (pos_ != s_.size()) fail("trailing characters after </box>");
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw Error(ErrorCode::kMalformedBox,
                "bbox string: " + why + " at offset " + std::to_string(pos_));
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

// Nesting depth of a JSON-ish text, ignoring brackets inside strings. Bounds
// recursion in the JSON parser on adversarial input.
int json_depth(std::string_view s) {
  int depth = 0, max_depth = 0;
  bool in_string = false, escaped = false;
  for (char c : s) {
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{' || c == '[') {
      max_depth = std::max(max_depth, ++depth);
    } else if (c == '}' || c == ']') {
      --depth;
    }
  }
  return max_depth;
}

[[noreturn]] void malformed(const std::string& why) {
  throw Error(ErrorCode::kMalformedToolCall, why);
}

ToolCall decode_tool_call(std::string_view body) {
  if (json_depth(body) > kMaxJsonDepth) malformed("tool call JSON nested too deeply");
  const auto j = nlohmann::json::parse(body.begin(), body.end(), nullptr,
                                       /*allow_exceptions=*/false);
  if (j.is_discarded()) malformed("tool call body is not valid JSON");
  if (!j.is_object()) malformed("tool call body must be a JSON object");

  const auto name_it = j.find("name");
  if (name_it == j.end() || !name_it->is_string()) malformed("tool call lacks a string 'name'");
  const auto& name = name_it->get_ref<const std::string&>();
  if (name != kZoomToolName) throw Error(ErrorCode::kUnknownTool, "unknown tool '" + name + "'");

  const auto args_it = j.find("arguments");
  if (args_it == j.end() || !args_it->is_object()) malformed("tool call lacks an 'arguments' object");
  const auto& args = *args_it;

  ToolCall tc;
  const auto idx_it = args.find("image_idx");
  if (idx_it == args.end() || !idx_it->is_number_integer()) malformed("'image_idx' must be an integer");
  const auto idx = idx_it->is_number_unsigned()
                       ? static_cast<long long>(std::min<std::uint64_t>(idx_it->get<std::uint64_t>(), LLONG_MAX))
                       : idx_it->get<long long>();
  if (idx < 1 || idx > INT_MAX) malformed("'image_idx' must be a positive 1-based index");
  tc.image_idx = static_cast<int>(idx);

  const auto box_it = args.find("bbox_2d");
  if (box_it == args.end() || !box_it->is_string()) malformed("'bbox_2d' must be a string");
  tc.bbox = parse_bbox_string(box_it->get_ref<const std::string&>());

  const auto label_it = args.find("label");
  if (label_it != args.end()) {
    if (!label_it->is_string()) malformed("'label' must be a string when present");
    tc.label = label_it->get<std::string>();
  }
  return tc;
}

void append_fixed(std::string& out, double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                 std::chars_format::fixed, kCoordinateDecimals);
  out.append(buf.data(), res.ptr);
}

}  // namespace

std::string_view prompt_template_version() { return assets::kPromptVersion; }

const std::string& build_system_prompt() {
  static const std::string prompt(assets::k_system_prompt);
  return prompt;
}

std::string build_user_prompt(std::string_view question) {
  return replace_all(assets::k_user_prompt, "{question}", question);
}

BBox parse_bbox_string(std::string_view s) {
  BoxScanner scan(s);
  std::array<double, 4> v{};
  scan.expect("<box>");
  scan.expect("(");
  v[0] = scan.number();
  scan.expect(",");
  v[1] = scan.number();
  scan.expect(")");
  scan.expect(",");
  scan.expect("(");
  v[2] = scan.number();
  scan.expect(",");
  v[3] = scan.number();
  scan.expect(")");
  scan.expect("</box>");
  scan.expect_end();

  for (double c : v) {
    if (!(c >= 0.0 && c <= 1.0)) {
      throw Error(ErrorCode::kOutOfRange, "bbox coordinate " + std::to_string(c) + " outside [0,1]");
    }
  }
  const BBox box{v[0], v[1], v[2], v[3]};
  if (!(box.x1 < box.x2) || !(box.y1 < box.y2)) {
    throw Error(ErrorCode::kEmptyBox, "bbox has x1 >= x2 or y1 >= y2");
  }
  return box;
}

std::string format_bbox_string(const BBox& box) {
  std::string out = "<box>(";
  append_fixed(out, box.x1);
  out += ',';
  append_fixed(out, box.y1);
  out += "),(";
  append_fixed(out, box.x2);
  out += ',';
  append_fixed(out, box.y2);
  out += ")</box>";
  return out;
}

AssistantTurn parse_assistant_turn(std::string_view text) {
  AssistantTurn turn;
  const std::size_t open = text.find(kToolCallOpen);
  if (open == std::string_view::npos) {
    if (text.find(kToolCallClose) != std::string_view::npos) {
      malformed("'</tool_call>' without a matching '<tool_call>'");
    }
    // The final answer is the last paragraph; earlier paragraphs are thought.
    const std::string_view body = trim(text);
    if (body.empty()) throw Error(ErrorCode::kEmptyTurn, "assistant turn is empty");
    const std::size_t split = body.rfind("\n\n");
    if (split == std::string_view::npos) {
      turn.action = FinalAnswer{std::string(body)};
    } else {
      turn.thought = std::string(trim(body.substr(0, split)));
      turn.action = FinalAnswer{std::string(trim(body.substr(split + 2)))};
    }
    return turn;
  }

  const std::size_t body_start = open + kToolCallOpen.size();
  const std::size_t close = text.find(kToolCallClose, body_start);
  if (close == std::string_view::npos) malformed("'<tool_call>' block is not closed");
  turn.thought = std::string(trim(text.substr(0, open)));
  turn.action = decode_tool_call(trim(text.substr(body_start, close - body_start)));
  turn.extra_tool_calls_ignored =
      text.find(kToolCallOpen, close + kToolCallClose.size()) != std::string_view::npos;
  return turn;
}

TurnParse try_parse_assistant_turn(std::string_view text) noexcept {
  TurnParse out;
  try {
    out.turn = parse_assistant_turn(text);
  } catch (const Error& e) {
    out.error = e.code();
    out.error_message = e.what();
  } catch (const std::exception& e) {
    out.error = ErrorCode::kMalformedToolCall;
    out.error_message = e.what();
  } catch (...) {
    out.error = ErrorCode::kMalformedToolCall;
    out.error_message = "unexpected parse failure";
  }
  return out;
}

std::string format_tool_response(int new_idx, int source_idx) {
  if (!(source_idx >= 1 && new_idx > source_idx)) {
    throw Error(ErrorCode::kPrecondition, "tool response needs new_idx > source_idx >= 1");
  }
  std::string_view tmpl = assets::k_tool_response;
  const std::size_t start = tmpl.find("<tool_response>");
  std::string text(tmpl.substr(start));
  text = replace_all(std::move(text), "{new_idx}", std::to_string(new_idx));
  return replace_all(std::move(text), "{image_idx}", std::to_string(source_idx));
}

std::string format_observation_message(int new_idx, int source_idx) {
  // Validates the indices before touching the template.
  std::string response = format_tool_response(new_idx, source_idx);
  std::string_view tmpl = assets::k_tool_response;
  std::string head(tmpl.substr(0, tmpl.find("<tool_response>")));
  head = replace_all(std::move(head), "{image_zoom_in}", "image_" + std::to_string(new_idx));
  return head + response;
}

std::string format_tool_error(std::string_view message) {
  return "<tool_response>\nError: " + std::string(message) + "\n</tool_response>";
}

std::string serialize_tool_call(const ToolCall& tc) {
  nlohmann::ordered_json args;
  args["image_idx"] = tc.image_idx;
  args["bbox_2d"] = format_bbox_string(tc.bbox);
  if (tc.label) args["label"] = *tc.label;
  nlohmann::ordered_json call;
  call["name"] = tc.name;
  call["arguments"] = std::move(args);
  return std::string(kToolCallOpen) + "\n" + call.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace) + "\n" + std::string(kToolCallClose);
}

std::string serialize_turn(const AssistantTurn& turn) {
  if (turn.is_tool_call()) {
    return turn.thought.empty() ? serialize_tool_call(turn.tool_call())
                                : turn.thought + "\n" + serialize_tool_call(turn.tool_call());
  }
  return turn.thought.empty() ? turn.final_answer().text
                              : turn.thought + "\n\n" + turn.final_answer().text;
}

}  // namespace zoomrl
