#pragma once

// Policies over the episode state.
//
// The trainable policy is log-linear: pi(a|s) = softmax(W^T phi(s) + b) over a
// fixed discrete action space of zoom anchors and answer tokens. phi(s) is a
// geometric perception of the current view (what colours, shapes and digits
// are resolvable at its zoom level) plus search history. The scripted
// policies produce protocol text directly and serve as references.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "zoomrl/rollout.hpp"

namespace zoomrl {

struct ActionSpace {
  static constexpr int kAnchors = 13;  // 3x3 at scale 0.5, then 2x2 at scale 0.34
  static constexpr int kZoomCurrentBegin = 0;
  static constexpr int kZoomOriginalBegin = kAnchors;
  static constexpr int kAnswerBegin = 2 * kAnchors;
  static constexpr int kVocabulary = kNumDigits;
  static constexpr int kSize = kAnswerBegin + kVocabulary;

  enum class Kind { kZoomCurrent, kZoomOriginal, kAnswer };
  struct Decoded {
    Kind kind;
    int index;  // anchor index or answer index
  };

  static Decoded decode(int action);
  static int zoom_current(int anchor) { return kZoomCurrentBegin + anchor; }
  static int zoom_original(int anchor) { return kZoomOriginalBegin + anchor; }
  static int answer(int digit) { return kAnswerBegin + digit; }
  static std::string answer_text(int index) { return std::to_string(index); }
};

/// Offsets of each feature block inside phi(s).
struct FeatureLayout {
  static constexpr int kInkGrid = 0;                         // 4x4 glyph coverage of the view
  static constexpr int kColorInAnchor = kInkGrid + 16;       // cue colour resolvable, per view anchor
  static constexpr int kCueInAnchor = kColorInAnchor + 13;   // full cue resolvable, per view anchor
  static constexpr int kRootColor = kCueInAnchor + 13;       // cue colour in original-image anchors
  static constexpr int kRootRevisited = kRootColor + 13;     // original anchor already zoomed (IoU > 0.5)
  static constexpr int kLegibleDigit = kRootRevisited + 13;  // one-hot digit of best legible candidate
  static constexpr int kCandidateMatchesCue = kLegibleDigit + 10;
  static constexpr int kCueInView = kCandidateMatchesCue + 1;
  static constexpr int kMismatchInView = kCueInView + 1;
  static constexpr int kDepth = kMismatchInView + 1;         // one-hot 0..4
  static constexpr int kTurnsLeft = kDepth + 5;              // one-hot 1..5
  static constexpr int kDim = kTurnsLeft + 5;
};

/// phi(s) for the state in `in`; length FeatureLayout::kDim.
std::vector<double> extract_features(const PolicyInput& in);

/// Zoom depth of the current view: number of crops between it and the original.
int view_depth(const State& state);

struct PolicyParams {
  int feature_dim = FeatureLayout::kDim;
  int action_count = ActionSpace::kSize;
  std::vector<double> weights;  // feature-major: weights[f * action_count + a]
  std::vector<double> bias;

  static PolicyParams zeros(int feature_dim = FeatureLayout::kDim,
                            int action_count = ActionSpace::kSize);
  /// Entries uniform in [-scale, scale] from a seeded stream.
  static PolicyParams random(std::uint64_t seed, double scale = 0.01,
                             int feature_dim = FeatureLayout::kDim,
                             int action_count = ActionSpace::kSize);

  double& w(int f, int a) { return weights[static_cast<std::size_t>(f) * action_count + a]; }
  double w(int f, int a) const { return weights[static_cast<std::size_t>(f) * action_count + a]; }

  /// this += scale * other
  void axpy(double scale, const PolicyParams& other);
  bool all_finite() const;
  friend bool operator==(const PolicyParams&, const PolicyParams&) = default;
};

std::vector<double> policy_logits(const PolicyParams& params, std::span<const double> features);

/// softmax(W^T phi + b), computed with the max-logit shift.
std::vector<double> action_distribution(const PolicyParams& params, std::span<const double> features);
std::vector<double> action_distribution(const PolicyParams& params, const PolicyInput& in);

double log_prob(const PolicyParams& params, std::span<const double> features, int action);

/// Score function d/dtheta log pi(action | phi) = phi (x) (e_a - pi), plus
/// (e_a - pi) for the bias.
PolicyParams logprob_grad(const PolicyParams& params, std::span<const double> features, int action);

/// grad += scale * d/dtheta log pi(action | phi), without materializing the
/// per-step gradient.
void accumulate_logprob_grad(const PolicyParams& params, std::span<const double> features,
                             int action, double scale, PolicyParams& grad);

/// Protocol text for a discrete action taken in `in`.
std::string action_text(const PolicyInput& in, int action);

class LinearSoftmaxPolicy final : public Policy {
 public:
  explicit LinearSoftmaxPolicy(const PolicyParams& params, bool greedy = false)
      : params_(params), greedy_(greedy) {}

  PolicyOutput act(const PolicyInput& in, Engine& rng) const override;
  ActionRecord describe_observation(const PolicyInput& in, int producing_action) const override;
  std::string name() const override { return greedy_ ? "linear-greedy" : "linear-sample"; }

  const PolicyParams& params() const { return params_; }

 private:
  PolicyParams params_;
  bool greedy_;
};

/// Answers a uniformly random vocabulary entry on the first turn.
class ImmediateAnswerPolicy final : public Policy {
 public:
  PolicyOutput act(const PolicyInput& in, Engine& rng) const override;
  std::string name() const override { return "immediate-uniform"; }
};

/// Zooms into the centre of the current view every turn and never answers.
class AlwaysZoomPolicy final : public Policy {
 public:
  PolicyOutput act(const PolicyInput& in, Engine& rng) const override;
  std::string name() const override { return "always-zoom"; }
};

/// Repeatedly zooms from the original image into nearly the same window
/// around one cue-coloured candidate, then answers with whatever digit it can
/// read there (or a seed-determined guess).
class OscillatoryPolicy final : public Policy {
 public:
  PolicyOutput act(const PolicyInput& in, Engine& rng) const override;
  std::string name() const override { return "oscillatory"; }

  /// The window used on `turn` (0-based) for `scene`.
  static BBox window_for(const Scene& scene, int turn);
};

/// Reads the ground-truth target region and zooms coarse-to-fine toward it,
/// choosing the best-overlap anchor of the current view at every level, then
/// answers as soon as the target is legible. Records features and actions so
/// its trajectories can be cloned.
class MultiScaleExpertPolicy final : public Policy {
 public:
  PolicyOutput act(const PolicyInput& in, Engine& rng) const override;
  std::string name() const override { return "multiscale-expert"; }

  /// The discrete action the expert takes in `in`.
  static int choose_action(const PolicyInput& in);
};

std::string params_to_json(const PolicyParams& params);
PolicyParams params_from_json(std::string_view text);  // throws Error{kBadCheckpoint}
void save_params(const PolicyParams& params, const std::filesystem::path& path);
PolicyParams load_params(const std::filesystem::path& path);

}  // namespace zoomrl
