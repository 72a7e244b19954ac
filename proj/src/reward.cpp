#include "zoomrl/reward.hpp"

#include <algorithm>
#include <cassert>

#include "zoomrl/error.hpp"

namespace zoomrl {

double iou(const BBox& a, const BBox& b) {
  const double inter = intersection_area(a, b);
  if (inter == 0.0) return 0.0;
  const double uni = a.area() + b.area() - inter;
  assert(uni > 0.0);
  return inter / uni;
}

std::vector<PairIou> pairwise_ious(const std::vector<std::optional<BBox>>& boxes) {
  std::vector<PairIou> out;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    if (!boxes[i]) continue;
    for (std::size_t j = i + 1; j < boxes.size(); ++j) {
      if (!boxes[j]) continue;
      out.push_back(PairIou{static_cast<int>(i), static_cast<int>(j), iou(*boxes[i], *boxes[j])});
    }
  }
  return out;
}

double redundancy_penalty(const std::vector<std::optional<BBox>>& boxes, const RewardConfig& cfg) {
  long long present = 0;
  for (const auto& b : boxes) present += b.has_value();
  if (present < 2) {
    throw Error(ErrorCode::kFewerThanTwoBoxes,
                "redundancy penalty needs at least two zoom boxes, got " + std::to_string(present));
  }
  double excess = 0.0;
  for (const PairIou& p : pairwise_ious(boxes)) {
    excess += std::max(0.0, p.value - cfg.epsilon);
  }
  const double pairs = static_cast<double>(present * (present - 1) / 2);
  return -(cfg.lambda / pairs) * excess;
}

int accuracy_reward(const Trajectory& traj, const Scene& scene) {
  if (traj.termination != Termination::kAnswered || !traj.final_answer) return 0;
  return verify_answer(scene, traj.qa, *traj.final_answer) ? 1 : 0;
}

RewardBreakdown total_reward(const Trajectory& traj, const Scene& scene, const RewardConfig& cfg) {
  RewardBreakdown rb;
  const auto boxes = extract_boxes(traj);
  for (const auto& b : boxes) rb.T += b.has_value();
  rb.r_acc = accuracy_reward(traj, scene);
  rb.pairwise_ious = pairwise_ious(boxes);
  rb.penalty_active = rb.r_acc == 0 && rb.T > 1;
  rb.gamma_rdn = rb.penalty_active ? redundancy_penalty(boxes, cfg) : 0.0;
  rb.total = rb.r_acc + rb.gamma_rdn;
  return rb;
}

std::optional<double> mean_pairwise_iou(const RewardBreakdown& rb) {
  if (rb.pairwise_ious.empty()) return std::nullopt;
  double sum = 0.0;
  for (const PairIou& p : rb.pairwise_ious) sum += p.value;
  return sum / static_cast<double>(rb.pairwise_ious.size());
}

}  // namespace zoomrl
