#include "zoomrl/trajlog.hpp"

#include <ostream>

#include "json.hpp"
#include "zoomrl/error.hpp"

namespace zoomrl {

using nlohmann::ordered_json;

namespace {

ordered_json box_json(const BBox& b) { return ordered_json::array({b.x1, b.y1, b.x2, b.y2}); }

ordered_json reward_json(const RewardBreakdown& rb) {
  ordered_json pairs = ordered_json::array();
  for (const PairIou& p : rb.pairwise_ious) pairs.push_back({{"t", p.t}, {"t_prime", p.t_prime}, {"iou", p.value}});
  return {{"r_acc", rb.r_acc},       {"gamma_rdn", rb.gamma_rdn},
          {"total", rb.total},       {"T", rb.T},
          {"penalty_active", rb.penalty_active}, {"pairwise_ious", std::move(pairs)}};
}

Termination parse_termination(const std::string& s) {
  for (Termination t : {Termination::kAnswered, Termination::kMaxTurns, Termination::kProtocolError}) {
    if (to_string(t) == s) return t;
  }
  throw Error(ErrorCode::kIo, "unknown termination '" + s + "'");
}

}  // namespace

std::string trajectory_to_jsonl(const Trajectory& traj, const RewardBreakdown& reward) {
  ordered_json turns = ordered_json::array();
  ordered_json boxes = ordered_json::array();
  int turn_index = 0;
  for (const Step& s : traj.steps) {
    ordered_json j;
    j["role"] = s.is_model_action ? "assistant" : "environment";
    if (s.is_model_action) j["turn"] = turn_index++;
    j["text"] = s.text;
    if (s.error) j["error"] = std::string(to_string(*s.error));
    if (s.record.action >= 0 && s.is_model_action) j["action"] = s.record.action;
    if (s.observation) {
      const Image& img = *s.observation;
      ordered_json obs{{"width", img.width}, {"height", img.height}, {"window", box_json(img.window)}};
      if (const auto* crop = std::get_if<CropProvenance>(&img.provenance)) {
        obs["source_index"] = crop->source_index;
        obs["bbox_in_source"] = box_json(crop->bbox_in_source);
      }
      j["observation"] = std::move(obs);
    }
    if (s.is_model_action) boxes.push_back(s.box_in_original ? box_json(*s.box_in_original) : ordered_json());
    turns.push_back(std::move(j));
  }
  ordered_json rec;
  rec["schema"] = kTrajectorySchema;
  rec["seed"] = traj.seed;
  rec["difficulty"] = to_string(traj.difficulty);
  rec["question"] = traj.qa.question;
  rec["answer"] = traj.qa.answer;
  rec["turns"] = std::move(turns);
  rec["boxes_in_original"] = std::move(boxes);
  rec["final_answer"] = traj.final_answer ? ordered_json(*traj.final_answer) : ordered_json();
  rec["T"] = traj.tool_calls;
  rec["termination"] = to_string(traj.termination);
  rec["reward"] = reward_json(reward);
  return rec.dump(-1, ' ', false, ordered_json::error_handler_t::replace);
}

void write_trajectory(std::ostream& out, const Trajectory& traj, const RewardBreakdown& reward) {
  out << trajectory_to_jsonl(traj, reward) << '\n';
}

TrajectorySummary trajectory_summary_from_jsonl(std::string_view line) {
  try {
    const auto j = ordered_json::parse(line);
    if (j.at("schema").get<std::string>() != kTrajectorySchema) {
      throw Error(ErrorCode::kIo, "unsupported trajectory schema " + j.at("schema").dump());
    }
    TrajectorySummary s;
    s.seed = j.at("seed").get<std::uint64_t>();
    s.difficulty = parse_difficulty(j.at("difficulty").get<std::string>());
    if (!j.at("final_answer").is_null()) s.final_answer = j.at("final_answer").get<std::string>();
    s.T = j.at("T").get<int>();
    s.termination = parse_termination(j.at("termination").get<std::string>());
    for (const auto& b : j.at("boxes_in_original")) {
      if (b.is_null()) {
        s.boxes_in_original.emplace_back();
      } else {
        s.boxes_in_original.push_back(BBox{b.at(0).get<double>(), b.at(1).get<double>(),
                                           b.at(2).get<double>(), b.at(3).get<double>()});
      }
    }
    const auto& r = j.at("reward");
    s.reward.r_acc = r.at("r_acc").get<int>();
    s.reward.gamma_rdn = r.at("gamma_rdn").get<double>();
    s.reward.total = r.at("total").get<double>();
    s.reward.T = r.at("T").get<int>();
    s.reward.penalty_active = r.at("penalty_active").get<bool>();
    for (const auto& p : r.at("pairwise_ious")) {
      s.reward.pairwise_ious.push_back(
          PairIou{p.at("t").get<int>(), p.at("t_prime").get<int>(), p.at("iou").get<double>()});
    }
    return s;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kIo, std::string("bad trajectory record: ") + e.what());
  }
}

}  // namespace zoomrl
