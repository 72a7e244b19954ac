#include "zoomrl/rollout.hpp"

#include <string>
#include <utility>

namespace zoomrl {

namespace {

Image make_view(const Scene& scene, const BBox& window, int resolution, bool rasterize,
                const SynthConfig& synth) {
  if (rasterize) return render(scene, window, resolution, resolution, synth);
  Image img;
  img.width = resolution;
  img.height = resolution;
  img.window = window;
  return img;
}

}  // namespace

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::kAnswered:
      return "answered";
    case Termination::kMaxTurns:
      return "max_turns";
    case Termination::kProtocolError:
      return "protocol_error";
  }
  return "max_turns";
}

ActionRecord Policy::describe_observation(const PolicyInput& /*in*/, int /*producing_action*/) const {
  return {};
}

State initial_state(const Scene& scene, const QAPair& qa, const RolloutConfig& cfg) {
  State state;
  state.question = qa.question;
  state.images.push_back(
      make_view(scene, kFullFrame, cfg.base_resolution, cfg.render_observations, cfg.synth));
  return state;
}

BBox compose_to_original(const State& state, int image_idx, const BBox& bbox) {
  BBox box = bbox;
  int idx = image_idx;
  while (true) {
    const Image& img = state.image(idx);
    const auto* crop = std::get_if<CropProvenance>(&img.provenance);
    if (crop == nullptr) return box;
    box = compose(crop->bbox_in_source, box);
    idx = crop->source_index;
  }
}

ToolOutcome apply_tool(State& state, const ToolCall& tc, const Scene& scene,
                       const RolloutConfig& cfg) {
  ToolOutcome out;
  if (tc.image_idx < 1 || tc.image_idx > state.image_count()) {
    out.error = ErrorCode::kBadImageIndex;
    out.message = format_tool_error("image_idx " + std::to_string(tc.image_idx) +
                                    " does not exist; " + std::to_string(state.image_count()) +
                                    " image(s) are available");
    return out;
  }
  const Image& source = state.image(tc.image_idx);
  const BBox window = compose(source.window, tc.bbox);
  if (!window.is_valid() || window.area() < cfg.synth.min_box_area) {
    out.error = ErrorCode::kDegenerateBox;
    out.message = format_tool_error("requested region is too small to zoom into");
    return out;
  }
  Image img = make_view(scene, window, cfg.crop_resolution, cfg.render_observations, cfg.synth);
  img.provenance = CropProvenance{tc.image_idx, tc.bbox};
  out.box_in_original = compose_to_original(state, tc.image_idx, tc.bbox);
  state.images.push_back(std::move(img));
  out.message = format_observation_message(state.image_count(), tc.image_idx);
  return out;
}

Trajectory run_episode(const Policy& policy, const Scene& scene, const QAPair& qa,
                       const RolloutConfig& cfg, std::uint64_t episode_seed) {
  Engine rng(episode_seed);
  State state = initial_state(scene, qa, cfg);
  Trajectory traj;
  traj.seed = scene.seed;
  traj.difficulty = scene.difficulty;
  traj.qa = qa;

  bool last_turn_failed = false;
  while (state.turns_used < cfg.max_turns) {
    PolicyOutput out = policy.act(PolicyInput{scene, qa, state, cfg}, rng);
    ++state.turns_used;

    Step model;
    model.is_model_action = true;
    model.text = std::move(out.text);
    model.record = std::move(out.record);
    const int action = model.record.action;
    TurnParse parsed = try_parse_assistant_turn(model.text);

    if (!parsed.ok()) {
      model.error = parsed.error;
      state.steps.push_back(std::move(model));
      Step env;
      env.text = format_tool_error(parsed.error_message);
      state.steps.push_back(std::move(env));
      last_turn_failed = true;
      continue;
    }

    if (!parsed.turn->is_tool_call()) {
      traj.final_answer = parsed.turn->final_answer().text;
      model.turn = std::move(parsed.turn);
      state.steps.push_back(std::move(model));
      traj.termination = Termination::kAnswered;
      break;
    }

    const ToolCall tc = parsed.turn->tool_call();
    model.turn = std::move(parsed.turn);
    ToolOutcome outcome = apply_tool(state, tc, scene, cfg);
    model.box_in_original = outcome.box_in_original;
    model.error = outcome.error;
    state.steps.push_back(std::move(model));

    Step env;
    env.text = std::move(outcome.message);
    if (!outcome.error) {
      ++traj.tool_calls;
      env.observation = state.current_view();
      env.record = policy.describe_observation(PolicyInput{scene, qa, state, cfg}, action);
    }
    state.steps.push_back(std::move(env));
    last_turn_failed = outcome.error.has_value();
  }

  if (!traj.final_answer) {
    traj.termination = last_turn_failed ? Termination::kProtocolError : Termination::kMaxTurns;
  }
  traj.turns = state.turns_used;
  traj.steps = std::move(state.steps);
  return traj;
}

std::vector<std::optional<BBox>> extract_boxes(const Trajectory& traj) {
  std::vector<std::optional<BBox>> boxes;
  for (const Step& s : traj.steps) {
    if (s.is_model_action) boxes.push_back(s.box_in_original);
  }
  return boxes;
}

}  // namespace zoomrl
