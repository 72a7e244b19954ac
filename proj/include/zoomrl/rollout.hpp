#pragma once

// The multi-turn episode loop. A State carries the complete interaction
// history (question, every image so far, every turn); a policy maps it to the
// next assistant turn, tool calls are executed against the scene renderer and
// their crops appended as new numbered images.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "zoomrl/protocol.hpp"
#include "zoomrl/rng.hpp"
#include "zoomrl/synthenv.hpp"

namespace zoomrl {

struct RolloutConfig {
  int max_turns = 5;
  int base_resolution = 448;
  int crop_resolution = 448;
  // Off during training: observations then carry window and provenance but
  // no pixels. Policies here perceive geometry, never pixels.
  bool render_observations = true;
  SynthConfig synth;
};

/// What a learning policy recorded about one decision: the state features it
/// saw and the discrete action it took. Empty for scripted policies.
struct ActionRecord {
  std::vector<double> features;
  int action = -1;

  bool empty() const { return action < 0; }
};

struct Step {
  std::string text;                    // assistant text, or environment message
  std::optional<AssistantTurn> turn;   // parsed turn (model steps only)
  std::optional<ErrorCode> error;      // protocol or tool error on this turn
  std::optional<Image> observation;    // environment steps only
  std::optional<BBox> box_in_original;
  bool is_model_action = false;        // loss-mask bit
  ActionRecord record;
};

enum class Termination { kAnswered, kMaxTurns, kProtocolError };
std::string_view to_string(Termination t);

struct State {
  std::string question;
  std::vector<Image> images;  // images[0] is "Image 1", the original
  std::vector<Step> steps;
  int turns_used = 0;

  const Image& image(int one_based) const { return images.at(static_cast<std::size_t>(one_based - 1)); }
  const Image& current_view() const { return images.back(); }
  int image_count() const { return static_cast<int>(images.size()); }
};

struct Trajectory {
  std::uint64_t seed = 0;
  Difficulty difficulty = Difficulty::kHard;
  QAPair qa;
  std::vector<Step> steps;
  std::optional<std::string> final_answer;
  int tool_calls = 0;  // T
  int turns = 0;       // assistant turns taken
  Termination termination = Termination::kMaxTurns;
};

struct PolicyInput {
  const Scene& scene;
  const QAPair& qa;
  const State& state;
  const RolloutConfig& cfg;
};

struct PolicyOutput {
  std::string text;
  ActionRecord record;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual PolicyOutput act(const PolicyInput& in, Engine& rng) const = 0;
  // Record attached to an environment step, so the learner can prove it is
  // masked out. Defaults to empty.
  virtual ActionRecord describe_observation(const PolicyInput& in, int producing_action) const;
  virtual std::string name() const = 0;
};

State initial_state(const Scene& scene, const QAPair& qa, const RolloutConfig& cfg);

/// Maps `bbox`, relative to image `image_idx`, to original-image coordinates
/// by composing along the crop provenance chain.
BBox compose_to_original(const State& state, int image_idx, const BBox& bbox);

struct ToolOutcome {
  std::optional<BBox> box_in_original;  // set on success
  std::optional<ErrorCode> error;
  std::string message;                   // tool response or error response
};

/// Executes a zoom-in call: renders the composed window and appends it as the
/// next image. Bad indices and degenerate windows produce an error response
/// and leave the images unchanged.
ToolOutcome apply_tool(State& state, const ToolCall& tc, const Scene& scene,
                       const RolloutConfig& cfg);

Trajectory run_episode(const Policy& policy, const Scene& scene, const QAPair& qa,
                       const RolloutConfig& cfg, std::uint64_t episode_seed);

/// One entry per assistant turn; empty for turns without an executed zoom.
std::vector<std::optional<BBox>> extract_boxes(const Trajectory& traj);

}  // namespace zoomrl
