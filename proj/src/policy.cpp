#include "zoomrl/policy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "zoomrl/error.hpp"

namespace zoomrl {

namespace {

constexpr std::array<const char*, ActionSpace::kAnchors> kAnchorNames = {
    "upper-left",         "upper-centre",        "upper-right",
    "centre-left",        "centre",              "centre-right",
    "lower-left",         "lower-centre",        "lower-right",
    "inner upper-left",   "inner upper-right",   "inner lower-left",
    "inner lower-right"};

constexpr double kRevisitIou = 0.5;

int view_resolution(const State& state, const RolloutConfig& cfg) {
  const Image& v = state.current_view();
  if (v.width > 0) return v.width;
  return state.image_count() == 1 ? cfg.base_resolution : cfg.crop_resolution;
}

std::string cue_phrase(const std::optional<Cue>& cue) {
  if (!cue) return "target";
  return std::string(to_string(cue->color)) + " " + std::string(to_string(cue->shape));
}

int sample_index(std::span<const double> probs, Engine& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  // Rounding left u above the cumulative sum; take the last positive entry.
  for (std::size_t i = probs.size(); i-- > 0;) {
    if (probs[i] > 0.0) return static_cast<int>(i);
  }
  return 0;
}

int argmax_index(std::span<const double> v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

std::string zoom_text(std::string thought, int image_idx, const BBox& box,
                      std::optional<std::string> label) {
  ToolCall tc;
  tc.image_idx = image_idx;
  tc.bbox = box;
  tc.label = std::move(label);
  return std::move(thought) + "\n" + serialize_tool_call(tc);
}

std::string answer_text(const std::string& thought, const std::string& answer) {
  return thought + "\n\n" + answer;
}

}  // namespace

ActionSpace::Decoded ActionSpace::decode(int action) {
  if (action < 0 || action >= kSize) {
    throw Error(ErrorCode::kPrecondition, "action index " + std::to_string(action) + " out of range");
  }
  if (action < kZoomOriginalBegin) return {Kind::kZoomCurrent, action - kZoomCurrentBegin};
  if (action < kAnswerBegin) return {Kind::kZoomOriginal, action - kZoomOriginalBegin};
  return {Kind::kAnswer, action - kAnswerBegin};
}

int view_depth(const State& state) {
  int depth = 0;
  const Image* img = &state.current_view();
  while (const auto* crop = std::get_if<CropProvenance>(&img->provenance)) {
    ++depth;
    img = &state.image(crop->source_index);
  }
  return depth;
}

std::vector<double> extract_features(const PolicyInput& in) {
  using L = FeatureLayout;
  std::vector<double> phi(L::kDim, 0.0);
  const State& state = in.state;
  const BBox view = state.current_view().window;
  const int res = view_resolution(state, in.cfg);
  const auto& anchors = zoom_anchors();
  const std::optional<Cue> cue = parse_cue(in.qa.question);

  std::array<BBox, ActionSpace::kAnchors> view_anchors;
  for (int k = 0; k < ActionSpace::kAnchors; ++k) view_anchors[k] = compose(view, anchors[k]);
  std::array<BBox, 16> grid;
  for (int gy = 0; gy < 4; ++gy) {
    for (int gx = 0; gx < 4; ++gx) {
      grid[gy * 4 + gx] = compose(view, BBox{gx / 4.0, gy / 4.0, (gx + 1) / 4.0, (gy + 1) / 4.0});
    }
  }

  bool cue_in_view = false;
  bool mismatch_in_view = false;
  const Cell* legible_candidate = nullptr;

  for (const Cell& cell : in.scene.cells) {
    const BBox& g = cell.glyph_box;
    if (g.x2 <= view.x1 || g.x1 >= view.x2 || g.y2 <= view.y1 || g.y1 >= view.y2) continue;
    for (int i = 0; i < 16; ++i) {
      phi[L::kInkGrid + i] += intersection_area(g, grid[i]) / grid[i].area();
    }
    if (!cue || cell.color != cue->color) continue;

    const Perception p = perceive(cell, view, res, in.cfg.synth);
    if (p == Perception::kNone) continue;
    const bool shape_visible = p >= Perception::kShape;
    const bool shape_matches = cell.shape == cue->shape;
    for (int k = 0; k < ActionSpace::kAnchors; ++k) {
      if (!view_anchors[k].contains(g)) continue;
      phi[L::kColorInAnchor + k] = 1.0;
      if (shape_visible && shape_matches) phi[L::kCueInAnchor + k] = 1.0;
    }
    if (shape_visible) (shape_matches ? cue_in_view : mismatch_in_view) = true;
    if (p == Perception::kLegible) {
      const bool better = legible_candidate == nullptr ||
                          (shape_matches && legible_candidate->shape != cue->shape);
      if (better) legible_candidate = &cell;
    }
  }

  if (cue) {
    for (const Cell& cell : in.scene.cells) {
      if (cell.color != cue->color) continue;
      if (perceive(cell, kFullFrame, in.cfg.base_resolution, in.cfg.synth) == Perception::kNone) continue;
      for (int k = 0; k < ActionSpace::kAnchors; ++k) {
        if (anchors[k].contains(cell.glyph_box)) phi[L::kRootColor + k] = 1.0;
      }
    }
  }

  for (const Step& s : state.steps) {
    if (!s.is_model_action || !s.box_in_original) continue;
    for (int k = 0; k < ActionSpace::kAnchors; ++k) {
      if (iou(*s.box_in_original, anchors[k]) > kRevisitIou) phi[L::kRootRevisited + k] = 1.0;
    }
  }

  if (legible_candidate != nullptr) {
    phi[L::kLegibleDigit + legible_candidate->digit] = 1.0;
    if (legible_candidate->shape == cue->shape) phi[L::kCandidateMatchesCue] = 1.0;
  }
  phi[L::kCueInView] = cue_in_view ? 1.0 : 0.0;
  phi[L::kMismatchInView] = (mismatch_in_view && !cue_in_view) ? 1.0 : 0.0;
  phi[L::kDepth + std::min(view_depth(state), 4)] = 1.0;
  const int left = std::clamp(in.cfg.max_turns - state.turns_used, 1, 5);
  phi[L::kTurnsLeft + left - 1] = 1.0;
  return phi;
}

PolicyParams PolicyParams::zeros(int feature_dim, int action_count) {
  PolicyParams p;
  p.feature_dim = feature_dim;
  p.action_count = action_count;
  p.weights.assign(static_cast<std::size_t>(feature_dim) * action_count, 0.0);
  p.bias.assign(static_cast<std::size_t>(action_count), 0.0);
  return p;
}

PolicyParams PolicyParams::random(std::uint64_t seed, double scale, int feature_dim,
                                  int action_count) {
  PolicyParams p = zeros(feature_dim, action_count);
  Engine eng(derive_seed(seed, {0x1217}));
  for (double& w : p.weights) w = uniform_real(eng, -scale, scale);
  for (double& b : p.bias) b = uniform_real(eng, -scale, scale);
  return p;
}

void PolicyParams::axpy(double scale, const PolicyParams& other) {
  for (std::size_t i = 0; i < weights.size(); ++i) weights[i] += scale * other.weights[i];
  for (std::size_t i = 0; i < bias.size(); ++i) bias[i] += scale * other.bias[i];
}

bool PolicyParams::all_finite() const {
  const auto finite = [](double v) { return std::isfinite(v); };
  return std::all_of(weights.begin(), weights.end(), finite) &&
         std::all_of(bias.begin(), bias.end(), finite);
}

std::vector<double> policy_logits(const PolicyParams& params, std::span<const double> features) {
  std::vector<double> z(params.bias);
  for (int f = 0; f < params.feature_dim; ++f) {
    const double x = features[f];
    if (x == 0.0) continue;
    const double* row = &params.weights[static_cast<std::size_t>(f) * params.action_count];
    for (int a = 0; a < params.action_count; ++a) z[a] += x * row[a];
  }
  return z;
}

std::vector<double> action_distribution(const PolicyParams& params, std::span<const double> features) {
  std::vector<double> z = policy_logits(params, features);
  const double zmax = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - zmax);
    sum += v;
  }
  for (double& v : z) v /= sum;
  return z;
}

std::vector<double> action_distribution(const PolicyParams& params, const PolicyInput& in) {
  return action_distribution(params, extract_features(in));
}

double log_prob(const PolicyParams& params, std::span<const double> features, int action) {
  const std::vector<double> z = policy_logits(params, features);
  const double zmax = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - zmax);
  return z[action] - zmax - std::log(sum);
}

void accumulate_logprob_grad(const PolicyParams& params, std::span<const double> features,
                             int action, double scale, PolicyParams& grad) {
  std::vector<double> delta = action_distribution(params, features);
  for (double& d : delta) d = -d;
  delta[action] += 1.0;
  for (int a = 0; a < params.action_count; ++a) grad.bias[a] += scale * delta[a];
  for (int f = 0; f < params.feature_dim; ++f) {
    const double x = features[f];
    if (x == 0.0) continue;
    double* row = &grad.weights[static_cast<std::size_t>(f) * params.action_count];
    const double sx = scale * x;
    for (int a = 0; a < params.action_count; ++a) row[a] += sx * delta[a];
  }
}

PolicyParams logprob_grad(const PolicyParams& params, std::span<const double> features, int action) {
  PolicyParams grad = PolicyParams::zeros(params.feature_dim, params.action_count);
  accumulate_logprob_grad(params, features, action, 1.0, grad);
  return grad;
}

std::string action_text(const PolicyInput& in, int action) {
  const auto d = ActionSpace::decode(action);
  const std::optional<Cue> cue = parse_cue(in.qa.question);
  const auto& anchors = zoom_anchors();
  switch (d.kind) {
    case ActionSpace::Kind::kZoomCurrent:
      return zoom_text("The " + cue_phrase(cue) + " may be in the " + kAnchorNames[d.index] +
                           " part of this view. Zooming in for a closer look.",
                       in.state.image_count(), anchors[d.index], cue_phrase(cue));
    case ActionSpace::Kind::kZoomOriginal:
      return zoom_text(std::string("Let me go back to the original image and search the ") +
                           kAnchorNames[d.index] + " region instead.",
                       1, anchors[d.index], std::nullopt);
    case ActionSpace::Kind::kAnswer:
      return answer_text("I can read the digit now.", ActionSpace::answer_text(d.index));
  }
  return {};
}

PolicyOutput LinearSoftmaxPolicy::act(const PolicyInput& in, Engine& rng) const {
  PolicyOutput out;
  out.record.features = extract_features(in);
  const std::vector<double> probs = action_distribution(params_, out.record.features);
  out.record.action = greedy_ ? argmax_index(probs) : sample_index(probs, rng);
  out.text = action_text(in, out.record.action);
  return out;
}

ActionRecord LinearSoftmaxPolicy::describe_observation(const PolicyInput& in,
                                                       int producing_action) const {
  if (producing_action < 0) return {};
  return ActionRecord{extract_features(in), producing_action};
}

PolicyOutput ImmediateAnswerPolicy::act(const PolicyInput& /*in*/, Engine& rng) const {
  const int index = static_cast<int>(uniform_int(rng, 0, ActionSpace::kVocabulary - 1));
  return PolicyOutput{answer_text("The answer seems clear from the full image.",
                                  ActionSpace::answer_text(index)),
                      {}};
}

PolicyOutput AlwaysZoomPolicy::act(const PolicyInput& in, Engine& /*rng*/) const {
  return PolicyOutput{zoom_text("Zooming into the centre again.", in.state.image_count(),
                                BBox{0.25, 0.25, 0.75, 0.75}, std::nullopt),
                      {}};
}

BBox OscillatoryPolicy::window_for(const Scene& scene, int turn) {
  const Cue cue = scene.cue();
  const Cell* anchor = &scene.cells.front();
  for (const Cell& c : scene.cells) {
    if (c.color == cue.color) {
      anchor = &c;
      break;
    }
  }
  constexpr double kHalf = 0.15;
  constexpr double kJitter = 0.004;
  const double shift = kJitter * static_cast<double>(turn % 3 - 1);
  const double cx = std::clamp(anchor->glyph_box.center_x() + shift, kHalf, 1.0 - kHalf);
  const double cy = std::clamp(anchor->glyph_box.center_y() + shift, kHalf, 1.0 - kHalf);
  return BBox{cx - kHalf, cy - kHalf, cx + kHalf, cy + kHalf};
}

PolicyOutput OscillatoryPolicy::act(const PolicyInput& in, Engine& /*rng*/) const {
  const State& state = in.state;
  if (state.turns_used < in.cfg.max_turns - 1) {
    return PolicyOutput{zoom_text("Let me adjust the crop slightly around the same spot.", 1,
                                  window_for(in.scene, state.turns_used), std::nullopt),
                        {}};
  }
  const BBox view = state.current_view().window;
  const int res = view_resolution(state, in.cfg);
  const Cue cue = in.scene.cue();
  std::optional<int> read;
  double best_dist = 0.0;
  for (const Cell& c : in.scene.cells) {
    if (c.color != cue.color || perceive(c, view, res, in.cfg.synth) != Perception::kLegible) continue;
    const double dist = std::hypot(c.glyph_box.center_x() - view.center_x(),
                                   c.glyph_box.center_y() - view.center_y());
    if (!read || dist < best_dist) {
      read = c.digit;
      best_dist = dist;
    }
  }
  const int digit = read ? *read : static_cast<int>(mix64(in.scene.seed) % kNumDigits);
  return PolicyOutput{answer_text("It should be this one.", ActionSpace::answer_text(digit)), {}};
}

int MultiScaleExpertPolicy::choose_action(const PolicyInput& in) {
  const BBox view = in.state.current_view().window;
  const int res = view_resolution(in.state, in.cfg);
  if (legibility_oracle(in.scene, view, res, in.cfg.synth)) {
    return ActionSpace::answer(in.scene.target().digit);
  }
  return ActionSpace::zoom_current(
      static_cast<int>(best_anchor_toward(view, in.scene.target().glyph_box)));
}

PolicyOutput MultiScaleExpertPolicy::act(const PolicyInput& in, Engine& /*rng*/) const {
  PolicyOutput out;
  out.record.features = extract_features(in);
  out.record.action = choose_action(in);
  out.text = action_text(in, out.record.action);
  return out;
}

std::string params_to_json(const PolicyParams& params) {
  nlohmann::ordered_json j;
  j["format"] = "zoomrl.policy_params";
  j["version"] = 1;
  j["feature_dim"] = params.feature_dim;
  j["action_count"] = params.action_count;
  j["weights"] = params.weights;
  j["bias"] = params.bias;
  return j.dump();
}

PolicyParams params_from_json(std::string_view text) {
  const auto j = nlohmann::json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCode::kBadCheckpoint, "checkpoint is not a JSON object");
  }
  try {
    if (j.at("format").get<std::string>() != "zoomrl.policy_params") {
      throw Error(ErrorCode::kBadCheckpoint, "unexpected checkpoint format");
    }
    if (j.at("version").get<int>() != 1) {
      throw Error(ErrorCode::kBadCheckpoint, "unsupported checkpoint version");
    }
    PolicyParams p;
    p.feature_dim = j.at("feature_dim").get<int>();
    p.action_count = j.at("action_count").get<int>();
    p.weights = j.at("weights").get<std::vector<double>>();
    p.bias = j.at("bias").get<std::vector<double>>();
    if (p.feature_dim != FeatureLayout::kDim || p.action_count != ActionSpace::kSize) {
      throw Error(ErrorCode::kBadCheckpoint, "checkpoint shape does not match this policy");
    }
    if (p.weights.size() != static_cast<std::size_t>(p.feature_dim) * p.action_count ||
        p.bias.size() != static_cast<std::size_t>(p.action_count)) {
      throw Error(ErrorCode::kBadCheckpoint, "checkpoint arrays have the wrong length");
    }
    if (!p.all_finite()) throw Error(ErrorCode::kBadCheckpoint, "checkpoint holds non-finite values");
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kBadCheckpoint, std::string("malformed checkpoint: ") + e.what());
  }
}

void save_params(const PolicyParams& params, const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write checkpoint " + path.string());
  out << params_to_json(params) << '\n';
  if (!out) throw Error(ErrorCode::kIo, "failed writing checkpoint " + path.string());
}

PolicyParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kBadCheckpoint, "cannot open checkpoint " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return params_from_json(ss.str());
}

}  // namespace zoomrl
