#pragma once

// Answer-gated reward with a redundancy penalty on overlapping zoom boxes:
//
//   penalty(tau) = -(lambda / C(T,2)) * sum_{t<t'} max(0, IoU(b_t, b_t') - epsilon)
//   R(tau)       = R_acc(tau) + 1{R_acc(tau) = 0 and T > 1} * penalty(tau)
//
// Boxes are in original-image coordinates; turns without a zoom contribute no
// box, and T counts present boxes only.

#include <optional>
#include <vector>

#include "zoomrl/geometry.hpp"
#include "zoomrl/rollout.hpp"
#include "zoomrl/synthenv.hpp"

namespace zoomrl {

struct RewardConfig {
  double epsilon = 0.5;  // overlap tolerance
  double lambda = 0.2;   // penalty weight
};

struct PairIou {
  int t = 0;  // assistant-turn indices, t < t_prime
  int t_prime = 0;
  double value = 0.0;
};

struct RewardBreakdown {
  int r_acc = 0;
  double gamma_rdn = 0.0;  // 0 whenever the indicator is off
  double total = 0.0;
  int T = 0;
  bool penalty_active = false;  // the indicator
  std::vector<PairIou> pairwise_ious;
};

/// All pairs of present boxes, in turn order.
std::vector<PairIou> pairwise_ious(const std::vector<std::optional<BBox>>& boxes);

/// Throws Error{kFewerThanTwoBoxes} when fewer than two boxes are present.
double redundancy_penalty(const std::vector<std::optional<BBox>>& boxes, const RewardConfig& cfg);

int accuracy_reward(const Trajectory& traj, const Scene& scene);

RewardBreakdown total_reward(const Trajectory& traj, const Scene& scene, const RewardConfig& cfg);

/// Mean of the pairwise IoUs, or nullopt with fewer than two boxes.
std::optional<double> mean_pairwise_iou(const RewardBreakdown& rb);

}  // namespace zoomrl
