#pragma once

// Group-relative policy optimization for the log-linear policy, reduced to
// its on-policy core: every prompt gets G sampled rollouts, each rollout's
// reward is normalized against its own group, and a single masked
// score-function step is taken per collection. Only steps the policy emitted
// (is_model_action) contribute to the gradient. Also hosts the cold-start
// behavior-cloning stage.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zoomrl/policy.hpp"
#include "zoomrl/reward.hpp"

namespace zoomrl {

struct TrainConfig {
  int batch_prompts = 96;
  int group_size = 12;
  double learning_rate = 0.5;
  double kl_coeff = 0.0;       // fixed: no KL regularization
  double entropy_coeff = 0.0;  // fixed: no entropy bonus
  double std_floor = 1e-6;
  int num_threads = 1;
};

/// a_i = (r_i - mean r) / max(std r, std_floor) with the population std; all
/// zeros when std r < std_floor. Throws Error{kGroupTooSmall} for G < 2.
std::vector<double> group_advantages(std::span<const double> rewards, double std_floor = 1e-6);

struct ScoredTrajectory {
  Trajectory traj;
  RewardBreakdown reward;
};

struct Group {
  std::uint64_t seed = 0;
  Difficulty difficulty = Difficulty::kHard;
  std::vector<ScoredTrajectory> members;
  std::vector<double> advantages;  // filled by compute_advantages()
};

void compute_advantages(std::vector<Group>& groups, const TrainConfig& cfg);

/// (1/N) sum_i a_i sum_{t : model action} grad log pi(a_t | phi_t), N the
/// number of trajectories. Groups must carry advantages.
PolicyParams policy_gradient(const std::vector<Group>& groups, const PolicyParams& params);

/// The objective whose gradient policy_gradient() returns, with the recorded
/// features and advantages held fixed.
double surrogate_objective(const std::vector<Group>& groups, const PolicyParams& params);

struct TrainStats {
  int step = 0;
  double mean_reward = 0.0;
  double success_rate = 0.0;
  double mean_T = 0.0;
  std::optional<double> mean_pairwise_iou_incorrect;
  double penalty_activation_rate = 0.0;
  double degenerate_group_rate = 0.0;
};

TrainStats summarize(const std::vector<Group>& groups);

struct UpdateResult {
  PolicyParams params;
  TrainStats stats;
};

/// Computes advantages, then params + lr * policy_gradient().
UpdateResult masked_pg_update(std::vector<Group>& groups, const PolicyParams& params,
                              const TrainConfig& cfg);

struct Prompt {
  Scene scene;
  QAPair qa;
};

/// Uniform sampling of training prompts, with scenes regenerated once up front.
class EnvSampler {
 public:
  explicit EnvSampler(const std::vector<DatasetRecord>& records, const SynthConfig& synth = {});
  const Prompt& draw(Engine& rng) const;
  std::size_t size() const { return prompts_.size(); }

 private:
  std::vector<Prompt> prompts_;
};

struct TrainResult {
  PolicyParams params;
  std::vector<TrainStats> log;
};

/// Runs `steps` collect-and-update iterations. Deterministic in `seed`.
TrainResult train_rl(const EnvSampler& sampler, const PolicyParams& init, const TrainConfig& cfg,
                     const RewardConfig& reward_cfg, const RolloutConfig& rollout_cfg, int steps,
                     std::uint64_t seed);

std::string stats_csv(const std::vector<TrainStats>& log);

struct ExpertDataset {
  struct Item {
    DatasetRecord record;
    Trajectory traj;
  };
  std::vector<Item> items;

  std::size_t decision_count() const;
};

/// Runs the multi-scale expert over every record; throws if any episode does
/// not end in a correct answer.
ExpertDataset build_expert_dataset(const std::vector<DatasetRecord>& records,
                                   const RolloutConfig& rollout_cfg);

/// Mean negative log-likelihood of the expert actions.
double bc_loss(const ExpertDataset& data, const PolicyParams& params);

struct CloneResult {
  PolicyParams params;
  std::vector<double> loss_per_epoch;  // loss before each epoch, then the final loss
};

/// Full-batch gradient descent on bc_loss() with step halving whenever a step
/// would raise the loss, so the recorded losses never increase. Throws
/// Error{kEmptyDataset} on an empty dataset.
CloneResult behavior_clone(const ExpertDataset& data, const PolicyParams& init, int epochs,
                           double learning_rate);

}  // namespace zoomrl
