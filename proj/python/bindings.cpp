#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "zoomrl/error.hpp"
#include "zoomrl/harness.hpp"
#include "zoomrl/trajlog.hpp"

namespace py = pybind11;
using namespace zoomrl;

namespace {

using PyBox = std::tuple<double, double, double, double>;

BBox to_box(const PyBox& b) { return {std::get<0>(b), std::get<1>(b), std::get<2>(b), std::get<3>(b)}; }
PyBox from_box(const BBox& b) { return {b.x1, b.y1, b.x2, b.y2}; }

std::vector<std::optional<BBox>> to_boxes(const std::vector<std::optional<PyBox>>& in) {
  std::vector<std::optional<BBox>> out;
  for (const auto& b : in) out.push_back(b ? std::optional(to_box(*b)) : std::nullopt);
  return out;
}

RewardConfig reward_cfg(double epsilon, double lambda) { return RewardConfig{epsilon, lambda}; }

py::dict turn_to_dict(const AssistantTurn& t) {
  py::dict d;
  d["thought"] = t.thought;
  if (t.is_tool_call()) {
    const ToolCall& tc = t.tool_call();
    d["kind"] = "tool_call";
    d["name"] = tc.name;
    d["image_idx"] = tc.image_idx;
    d["bbox"] = from_box(tc.bbox);
    d["label"] = tc.label ? py::cast(*tc.label) : py::none();
    d["extra_tool_calls_ignored"] = t.extra_tool_calls_ignored;
  } else {
    d["kind"] = "answer";
    d["text"] = t.final_answer().text;
  }
  return d;
}

py::dict qa_to_dict(const QAPair& qa) {
  py::dict d;
  d["question"] = qa.question;
  d["answer"] = qa.answer;
  d["target_region"] = from_box(qa.target_region);
  return d;
}

// A scripted reference policy by name, or a checkpoint path.
std::unique_ptr<Policy> make_policy(const std::string& spec, bool greedy) {
  if (spec == "expert") return std::make_unique<MultiScaleExpertPolicy>();
  if (spec == "immediate") return std::make_unique<ImmediateAnswerPolicy>();
  if (spec == "oscillatory") return std::make_unique<OscillatoryPolicy>();
  if (spec == "always-zoom") return std::make_unique<AlwaysZoomPolicy>();
  return std::make_unique<LinearSoftmaxPolicy>(load_params(spec), greedy);
}

ExperimentConfig config_from(const std::string& text) { return parse_config(text); }

// Scores bare boxes plus a right/wrong flag through total_reward(), using a
// synthetic trajectory on a fixed scene.
py::dict score_boxes(bool correct, const std::vector<std::optional<PyBox>>& boxes, double epsilon, double lambda) {
  static const Scene scene = generate_scene(0, Difficulty::kEasy);
  static const QAPair qa = make_qa(scene);
  Trajectory t;
  t.qa = qa;
  for (const auto& b : to_boxes(boxes)) {
    Step s;
    s.is_model_action = true;
    s.box_in_original = b;
    t.steps.push_back(s);
    t.tool_calls += b.has_value();
  }
  t.final_answer = correct ? qa.answer : (qa.answer == "0" ? "1" : "0");
  t.termination = Termination::kAnswered;
  const RewardBreakdown rb = total_reward(t, scene, reward_cfg(epsilon, lambda));
  py::dict d;
  d["r_acc"] = rb.r_acc;
  d["gamma_rdn"] = rb.gamma_rdn;
  d["total"] = rb.total;
  d["T"] = rb.T;
  d["penalty_active"] = rb.penalty_active;
  return d;
}

}  // namespace

PYBIND11_MODULE(_zoomrl, m) {
  m.doc() = "zoom-and-answer RL sandbox: geometry, protocol, reward, GRPO and experiment stages";

  static py::handle error_type = py::exception<Error>(m, "ZoomRLError", PyExc_RuntimeError).release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const std::string code(to_string(e.code()));
      py::object inst = py::reinterpret_borrow<py::object>(error_type)(code, e.what());
      inst.attr("code") = code;
      PyErr_SetObject(error_type.ptr(), inst.ptr());
    }
  });

  // Geometry and reward.
  m.def("iou", [](const PyBox& a, const PyBox& b) { return iou(to_box(a), to_box(b)); }, py::arg("a"), py::arg("b"));
  m.def("compose", [](const PyBox& parent, const PyBox& child) { return from_box(compose(to_box(parent), to_box(child))); },
        py::arg("parent"), py::arg("child"));
  m.def("redundancy_penalty",
        [](const std::vector<std::optional<PyBox>>& boxes, double epsilon, double lambda) {
          return redundancy_penalty(to_boxes(boxes), reward_cfg(epsilon, lambda));
        },
        py::arg("boxes"), py::arg("epsilon") = 0.5, py::arg("lam") = 0.2);
  m.def("score_boxes", &score_boxes, py::arg("correct"), py::arg("boxes"), py::arg("epsilon") = 0.5,
        py::arg("lam") = 0.2, "Total reward of an episode with these zoom boxes and a right or wrong answer.");
  m.def("group_advantages",
        [](const std::vector<double>& r, double floor) { return group_advantages(r, floor); },
        py::arg("rewards"), py::arg("std_floor") = 1e-6);

  // Protocol.
  m.def("system_prompt", &build_system_prompt);
  m.def("user_prompt", &build_user_prompt, py::arg("question"));
  m.def("parse_bbox_string", [](std::string_view s) { return from_box(parse_bbox_string(s)); }, py::arg("text"));
  m.def("format_bbox_string", [](const PyBox& b) { return format_bbox_string(to_box(b)); }, py::arg("box"));
  m.def("parse_assistant_turn", [](std::string_view s) { return turn_to_dict(parse_assistant_turn(s)); },
        py::arg("text"));
  m.def("serialize_tool_call",
        [](int image_idx, const PyBox& bbox, std::optional<std::string> label) {
          ToolCall tc;
          tc.image_idx = image_idx;
          tc.bbox = to_box(bbox);
          tc.label = std::move(label);
          return serialize_tool_call(tc);
        },
        py::arg("image_idx"), py::arg("bbox"), py::arg("label") = py::none());
  m.def("format_tool_response", &format_tool_response, py::arg("new_idx"), py::arg("source_idx"));

  // Scenes.
  py::class_<Scene>(m, "Scene")
      .def_readonly("seed", &Scene::seed)
      .def_property_readonly("difficulty", [](const Scene& s) { return std::string(to_string(s.difficulty)); })
      .def_readonly("target_cell", &Scene::target_cell)
      .def_readonly("distractor_count", &Scene::distractor_count)
      .def_property_readonly("cells", [](const Scene& s) {
        py::list cells;
        for (const Cell& c : s.cells) {
          py::dict d;
          d["region"] = from_box(c.region);
          d["glyph_box"] = from_box(c.glyph_box);
          d["color"] = std::string(to_string(c.color));
          d["shape"] = std::string(to_string(c.shape));
          d["digit"] = c.digit;
          d["is_target"] = c.is_target;
          cells.append(d);
        }
        return cells;
      });
  m.def("generate_scene",
        [](std::uint64_t seed, const std::string& difficulty) { return generate_scene(seed, parse_difficulty(difficulty)); },
        py::arg("seed"), py::arg("difficulty") = "hard");
  m.def("make_qa", [](const Scene& s) { return qa_to_dict(make_qa(s)); }, py::arg("scene"));
  m.def("render",
        [](const Scene& s, const PyBox& window, int w, int h) {
          const Image img = render(s, to_box(window), w, h);
          py::array_t<std::uint8_t> out({img.height, img.width, 3});
          std::copy(img.pixels.begin(), img.pixels.end(), out.mutable_data());
          return out;
        },
        py::arg("scene"), py::arg("window") = PyBox{0, 0, 1, 1}, py::arg("width") = 448, py::arg("height") = 448);
  m.def("legibility_oracle",
        [](const Scene& s, const PyBox& window, int out_px) { return legibility_oracle(s, to_box(window), out_px); },
        py::arg("scene"), py::arg("window"), py::arg("out_px") = 448);
  m.def("verify_answer", [](const Scene& s, const std::string& answer) { return verify_answer(s, make_qa(s), answer); },
        py::arg("scene"), py::arg("answer"));

  // Episodes.
  m.def("run_episode_jsonl",
        [](const Scene& s, const std::string& policy, std::uint64_t seed, int max_turns, bool greedy, bool render_obs,
           double epsilon, double lambda) {
          RolloutConfig cfg;
          cfg.max_turns = max_turns;
          cfg.render_observations = render_obs;
          const auto pol = make_policy(policy, greedy);
          const QAPair qa = make_qa(s);
          const Trajectory t = run_episode(*pol, s, qa, cfg, seed);
          return trajectory_to_jsonl(t, total_reward(t, s, reward_cfg(epsilon, lambda)));
        },
        py::arg("scene"), py::arg("policy") = "expert", py::arg("seed") = 0, py::arg("max_turns") = 5,
        py::arg("greedy") = true, py::arg("render_observations") = false, py::arg("epsilon") = 0.5,
        py::arg("lam") = 0.2);

  // Experiment stages. `config` is the key = value config text.
  m.def("default_config", [] { return config_to_text(ExperimentConfig{}); });
  m.def("normalize_config", [](const std::string& text) { return config_to_text(config_from(text)); },
        py::arg("config"));
  m.def("gen_data",
        [](const fs::path& out, const std::string& config) { cmd_gen_data(config_from(config), out); },
        py::arg("out"), py::arg("config") = "");
  m.def("coldstart",
        [](const fs::path& data, const fs::path& out, const std::string& config) {
          return cmd_coldstart(config_from(config), read_dataset(data), out).loss_per_epoch;
        },
        py::arg("data"), py::arg("out"), py::arg("config") = "");
  m.def("train_rl",
        [](const fs::path& data, const fs::path& init, const fs::path& out, const std::string& config) {
          const ExperimentConfig cfg = config_from(config);
          const RlResult r = cmd_train_rl(cfg, read_dataset(data), load_params(init), out);
          return stats_csv(r.log);
        },
        py::arg("data"), py::arg("init"), py::arg("out"), py::arg("config") = "",
        "Returns the per-step stats as CSV text.");
  m.def("evaluate",
        [](const fs::path& data, const std::string& policy, const fs::path& out, const std::string& config) {
          const std::vector<Difficulty> all(kAllDifficulties.begin(), kAllDifficulties.end());
          return report_to_json(cmd_eval(config_from(config), read_dataset(data), policy, all, out));
        },
        py::arg("data"), py::arg("policy"), py::arg("out"), py::arg("config") = "",
        "Returns the report as JSON text.");
  m.def("run_ablation",
        [](const fs::path& data, const fs::path& out, const std::string& config) {
          return summary_markdown(cmd_run_ablation(config_from(config), read_dataset(data), out));
        },
        py::arg("data"), py::arg("out"), py::arg("config") = "");
}
