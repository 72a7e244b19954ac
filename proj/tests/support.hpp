#pragma once

#include <optional>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "zoomrl/reward.hpp"

namespace testing {

inline oracle::Box to_oracle(const zoomrl::BBox& b) { return {b.x1, b.y1, b.x2, b.y2}; }

inline std::vector<std::optional<oracle::Box>> to_oracle(const std::vector<std::optional<zoomrl::BBox>>& v) {
  std::vector<std::optional<oracle::Box>> out;
  for (const auto& b : v) out.push_back(b ? std::optional(to_oracle(*b)) : std::nullopt);
  return out;
}

/// A hand-built trajectory: one model step per entry in `boxes` (a zoom when
/// present, a non-tool turn otherwise), then an optional final answer.
inline zoomrl::Trajectory make_trajectory(const zoomrl::Scene& scene, const zoomrl::QAPair& qa,
                                          const std::vector<std::optional<zoomrl::BBox>>& boxes,
                                          std::optional<std::string> answer) {
  zoomrl::Trajectory t;
  t.seed = scene.seed;
  t.difficulty = scene.difficulty;
  t.qa = qa;
  for (const auto& b : boxes) {
    zoomrl::Step s;
    s.is_model_action = true;
    s.box_in_original = b;
    t.steps.push_back(s);
    zoomrl::Step env;
    t.steps.push_back(env);
    t.tool_calls += b.has_value();
  }
  if (answer) {
    zoomrl::Step s;
    s.is_model_action = true;
    t.steps.push_back(s);
    t.final_answer = std::move(answer);
    t.termination = zoomrl::Termination::kAnswered;
  }
  t.turns = static_cast<int>(boxes.size()) + (t.final_answer ? 1 : 0);
  return t;
}

inline std::string wrong_answer(const zoomrl::QAPair& qa) {
  return qa.answer == "0" ? "1" : "0";
}

}  // namespace testing
