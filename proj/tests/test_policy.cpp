#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "doctest.h"
#include "oracles.hpp"
#include "zoomrl/error.hpp"
#include "zoomrl/policy.hpp"
#include "zoomrl/reward.hpp"

using namespace zoomrl;

namespace {

RolloutConfig fast_cfg() {
  RolloutConfig cfg;
  cfg.render_observations = false;
  return cfg;
}

// Feature vectors seen along sampled episodes of a random policy.
std::vector<std::vector<double>> sample_states(int want, std::uint64_t seed) {
  const RolloutConfig cfg = fast_cfg();
  const LinearSoftmaxPolicy pol(PolicyParams::random(seed, 2.0));
  std::vector<std::vector<double>> out;
  for (std::uint64_t s = 0; static_cast<int>(out.size()) < want; ++s) {
    const Scene scene = generate_scene(s, static_cast<Difficulty>(s % 3));
    const Trajectory t = run_episode(pol, scene, make_qa(scene), cfg, seed + s);
    for (const Step& st : t.steps) {
      if (st.is_model_action && !st.record.empty()) out.push_back(st.record.features);
    }
  }
  out.resize(static_cast<std::size_t>(want));
  return out;
}

}  // namespace

TEST_CASE("zero params give the uniform distribution") {
  const auto states = sample_states(5, 1);
  const PolicyParams p = PolicyParams::zeros();
  for (const auto& phi : states) {
    for (double pr : action_distribution(p, phi)) CHECK(pr == doctest::Approx(1.0 / ActionSpace::kSize));
  }
}

TEST_CASE("distribution sums to one and matches the oracle") {
  const auto states = sample_states(1000, 2);
  const PolicyParams p = PolicyParams::random(9, 3.0);
  for (const auto& phi : states) {
    const auto dist = action_distribution(p, phi);
    REQUIRE(dist.size() == static_cast<std::size_t>(ActionSpace::kSize));
    CHECK(std::accumulate(dist.begin(), dist.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    for (int a = 0; a < ActionSpace::kSize; a += 7) {
      CHECK(log_prob(p, phi, a) == doctest::Approx(oracle::log_prob(p.weights, p.bias, phi, a)).epsilon(1e-10));
    }
  }
}

TEST_CASE("shifting all logits leaves the distribution unchanged") {
  const auto states = sample_states(20, 3);
  const PolicyParams p = PolicyParams::random(4, 1.0);
  PolicyParams shifted = p;
  for (double& b : shifted.bias) b += 123.0;
  for (const auto& phi : states) {
    const auto d1 = action_distribution(p, phi);
    const auto d2 = action_distribution(shifted, phi);
    for (std::size_t a = 0; a < d1.size(); ++a) CHECK(d1[a] == doctest::Approx(d2[a]).epsilon(1e-9));
  }
}

TEST_CASE("score function matches central differences") {
  const auto states = sample_states(20, 4);
  PolicyParams p = PolicyParams::random(8, 1.0);
  Engine eng(12);
  const double h = 1e-5;
  for (const auto& phi : states) {
    const int a = static_cast<int>(uniform_int(eng, 0, ActionSpace::kSize - 1));
    const PolicyParams g = logprob_grad(p, phi, a);
    double diff2 = 0.0, norm2 = 0.0;
    for (std::size_t i = 0; i < p.weights.size(); ++i) {
      const double keep = p.weights[i];
      p.weights[i] = keep + h;
      const double up = log_prob(p, phi, a);
      p.weights[i] = keep - h;
      const double down = log_prob(p, phi, a);
      p.weights[i] = keep;
      const double fd = (up - down) / (2 * h);
      diff2 += (fd - g.weights[i]) * (fd - g.weights[i]);
      norm2 += g.weights[i] * g.weights[i];
    }
    for (std::size_t i = 0; i < p.bias.size(); ++i) {
      const double keep = p.bias[i];
      p.bias[i] = keep + h;
      const double up = log_prob(p, phi, a);
      p.bias[i] = keep - h;
      const double down = log_prob(p, phi, a);
      p.bias[i] = keep;
      const double fd = (up - down) / (2 * h);
      diff2 += (fd - g.bias[i]) * (fd - g.bias[i]);
      norm2 += g.bias[i] * g.bias[i];
    }
    CHECK(std::sqrt(diff2 / norm2) < 1e-4);
  }
}

TEST_CASE("expected score is zero and accumulation matches") {
  const auto states = sample_states(10, 5);
  const PolicyParams p = PolicyParams::random(6, 1.5);
  for (const auto& phi : states) {
    const auto dist = action_distribution(p, phi);
    PolicyParams expected = PolicyParams::zeros();
    for (int a = 0; a < ActionSpace::kSize; ++a) accumulate_logprob_grad(p, phi, a, dist[a], expected);
    for (double v : expected.weights) CHECK(std::abs(v) < 1e-12);
    for (double v : expected.bias) CHECK(std::abs(v) < 1e-12);

    PolicyParams acc = PolicyParams::zeros();
    accumulate_logprob_grad(p, phi, 3, 1.0, acc);
    CHECK(acc == logprob_grad(p, phi, 3));
    CHECK(logprob_grad(p, phi, 3) == logprob_grad(p, phi, 3));
  }
}

TEST_CASE("oscillatory policy revisits one window") {
  const RolloutConfig cfg = fast_cfg();
  const RewardConfig rcfg;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Scene s = generate_scene(seed, Difficulty::kHard);
    const QAPair qa = make_qa(s);
    const Trajectory t = run_episode(OscillatoryPolicy{}, s, qa, cfg, seed);
    const auto rb = total_reward(t, s, rcfg);
    REQUIRE(rb.T >= 2);
    for (const PairIou& p : rb.pairwise_ious) CHECK(p.value > 0.8);
    if (rb.r_acc == 0) CHECK(rb.total < 0.0);
    const Trajectory again = run_episode(OscillatoryPolicy{}, s, qa, cfg, seed);
    CHECK(extract_boxes(again) == extract_boxes(t));
  }
}

TEST_CASE("expert solves hard scenes with at least two zooms") {
  const RolloutConfig cfg = fast_cfg();
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const Scene s = generate_scene(seed, Difficulty::kHard);
    const QAPair qa = make_qa(s);
    const Trajectory t = run_episode(MultiScaleExpertPolicy{}, s, qa, cfg, seed);
    REQUIRE(t.termination == Termination::kAnswered);
    REQUIRE(accuracy_reward(t, s) == 1);
    REQUIRE(t.tool_calls >= 2);
    for (const Step& st : t.steps) {
      if (st.is_model_action) REQUIRE_FALSE(st.record.empty());
    }
  }
}

TEST_CASE("action text parses back to the intended action") {
  const RolloutConfig cfg = fast_cfg();
  const Scene s = generate_scene(1, Difficulty::kHard);
  const QAPair qa = make_qa(s);
  const State st = initial_state(s, qa, cfg);
  const PolicyInput in{s, qa, st, cfg};
  for (int a = 0; a < ActionSpace::kSize; ++a) {
    const AssistantTurn turn = parse_assistant_turn(action_text(in, a));
    const auto d = ActionSpace::decode(a);
    if (d.kind == ActionSpace::Kind::kAnswer) {
      CHECK(turn.final_answer().text == std::to_string(d.index));
    } else {
      REQUIRE(turn.is_tool_call());
      const BBox got = turn.tool_call().bbox;
      const BBox want = zoom_anchors()[static_cast<std::size_t>(d.index)];
      CHECK(std::abs(got.x1 - want.x1) <= 1e-6);
      CHECK(std::abs(got.y1 - want.y1) <= 1e-6);
      CHECK(std::abs(got.x2 - want.x2) <= 1e-6);
      CHECK(std::abs(got.y2 - want.y2) <= 1e-6);
      CHECK(turn.tool_call().image_idx == 1);
    }
  }
}

TEST_CASE("checkpoint round trip and rejection") {
  const PolicyParams p = PolicyParams::random(77, 0.5);
  CHECK(params_from_json(params_to_json(p)) == p);

  const auto dir = std::filesystem::temp_directory_path() / "zoomrl_policy_test";
  std::filesystem::remove_all(dir);
  save_params(p, dir / "nested" / "params.json");
  CHECK(load_params(dir / "nested" / "params.json") == p);

  auto code = [](auto&& fn) -> std::optional<ErrorCode> {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return std::nullopt;
  };
  CHECK(code([] { params_from_json("not json"); }) == ErrorCode::kBadCheckpoint);
  CHECK(code([] { params_from_json("[1,2,3]"); }) == ErrorCode::kBadCheckpoint);
  CHECK(code([&] { load_params(dir / "missing.json"); }) == ErrorCode::kBadCheckpoint);
  std::string truncated = params_to_json(p);
  truncated.resize(truncated.size() / 2);
  CHECK(code([&] { params_from_json(truncated); }) == ErrorCode::kBadCheckpoint);
  std::filesystem::remove_all(dir);
}
