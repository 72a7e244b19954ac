#include "zoomrl/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "zoomrl/error.hpp"

namespace zoomrl {

std::vector<double> group_advantages(std::span<const double> rewards, double std_floor) {
  if (rewards.size() < 2) {
    throw Error(ErrorCode::kGroupTooSmall,
                "group needs at least 2 rollouts, got " + std::to_string(rewards.size()));
  }
  const double n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double sd = std::sqrt(var / n);

  std::vector<double> adv(rewards.size(), 0.0);
  if (sd < std_floor) return adv;
  for (std::size_t i = 0; i < rewards.size(); ++i) adv[i] = (rewards[i] - mean) / sd;
  return adv;
}

void compute_advantages(std::vector<Group>& groups, const TrainConfig& cfg) {
  for (Group& g : groups) {
    std::vector<double> rewards;
    rewards.reserve(g.members.size());
    for (const auto& m : g.members) rewards.push_back(m.reward.total);
    g.advantages = group_advantages(rewards, cfg.std_floor);
  }
}

namespace {

std::size_t trajectory_count(const std::vector<Group>& groups) {
  std::size_t n = 0;
  for (const Group& g : groups) n += g.members.size();
  return n;
}

}  // namespace

PolicyParams policy_gradient(const std::vector<Group>& groups, const PolicyParams& params) {
  PolicyParams grad = PolicyParams::zeros(params.feature_dim, params.action_count);
  const std::size_t n = trajectory_count(groups);
  if (n == 0) return grad;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (const Group& g : groups) {
    for (std::size_t i = 0; i < g.members.size(); ++i) {
      const double a = g.advantages.at(i);
      if (a == 0.0) continue;
      for (const Step& s : g.members[i].traj.steps) {
        if (!s.is_model_action || s.record.empty()) continue;
        accumulate_logprob_grad(params, s.record.features, s.record.action, a * inv_n, grad);
      }
    }
  }
  return grad;
}

double surrogate_objective(const std::vector<Group>& groups, const PolicyParams& params) {
  const std::size_t n = trajectory_count(groups);
  if (n == 0) return 0.0;
  double total = 0.0;
  for (const Group& g : groups) {
    for (std::size_t i = 0; i < g.members.size(); ++i) {
      const double a = g.advantages.at(i);
      for (const Step& s : g.members[i].traj.steps) {
        if (!s.is_model_action || s.record.empty()) continue;
        total += a * log_prob(params, s.record.features, s.record.action);
      }
    }
  }
  return total / static_cast<double>(n);
}

TrainStats summarize(const std::vector<Group>& groups) {
  TrainStats st;
  std::size_t n = 0, incorrect_with_pairs = 0, degenerate = 0;
  double iou_sum = 0.0;
  for (const Group& g : groups) {
    bool all_same = true;
    for (const auto& m : g.members) {
      ++n;
      st.mean_reward += m.reward.total;
      st.success_rate += m.reward.r_acc;
      st.mean_T += m.reward.T;
      st.penalty_activation_rate += (m.reward.penalty_active && m.reward.gamma_rdn < 0.0) ? 1.0 : 0.0;
      if (m.reward.r_acc == 0) {
        if (auto mi = mean_pairwise_iou(m.reward)) {
          iou_sum += *mi;
          ++incorrect_with_pairs;
        }
      }
      all_same = all_same && m.reward.total == g.members.front().reward.total;
    }
    degenerate += all_same ? 1 : 0;
  }
  if (n > 0) {
    const double dn = static_cast<double>(n);
    st.mean_reward /= dn;
    st.success_rate /= dn;
    st.mean_T /= dn;
    st.penalty_activation_rate /= dn;
  }
  if (!groups.empty()) st.degenerate_group_rate = static_cast<double>(degenerate) / groups.size();
  if (incorrect_with_pairs > 0) st.mean_pairwise_iou_incorrect = iou_sum / incorrect_with_pairs;
  return st;
}

UpdateResult masked_pg_update(std::vector<Group>& groups, const PolicyParams& params,
                              const TrainConfig& cfg) {
  compute_advantages(groups, cfg);
  UpdateResult out{params, summarize(groups)};
  out.params.axpy(cfg.learning_rate, policy_gradient(groups, params));
  return out;
}

EnvSampler::EnvSampler(const std::vector<DatasetRecord>& records, const SynthConfig& synth) {
  if (records.empty()) throw Error(ErrorCode::kEmptyDataset, "no training prompts");
  prompts_.reserve(records.size());
  for (const DatasetRecord& r : records) {
    Scene scene = generate_scene(r.seed, r.difficulty, synth);
    QAPair qa = make_qa(scene);
    prompts_.push_back(Prompt{std::move(scene), std::move(qa)});
  }
}

const Prompt& EnvSampler::draw(Engine& rng) const {
  return prompts_[static_cast<std::size_t>(
      uniform_int(rng, 0, static_cast<std::int64_t>(prompts_.size()) - 1))];
}

TrainResult train_rl(const EnvSampler& sampler, const PolicyParams& init, const TrainConfig& cfg,
                     const RewardConfig& reward_cfg, const RolloutConfig& rollout_cfg, int steps,
                     std::uint64_t seed) {
  if (cfg.group_size < 2) throw Error(ErrorCode::kGroupTooSmall, "group_size must be >= 2");
  TrainResult result{init, {}};
  result.log.reserve(static_cast<std::size_t>(std::max(steps, 0)));

  for (int step = 0; step < steps; ++step) {
    Engine prompt_rng(derive_seed(seed, {0xBA7C, static_cast<std::uint64_t>(step)}));
    std::vector<const Prompt*> prompts;
    prompts.reserve(cfg.batch_prompts);
    for (int p = 0; p < cfg.batch_prompts; ++p) prompts.push_back(&sampler.draw(prompt_rng));

    const LinearSoftmaxPolicy policy(result.params, /*greedy=*/false);
    std::vector<Group> groups(prompts.size());
    auto collect = [&](std::size_t begin, std::size_t end) {
      for (std::size_t p = begin; p < end; ++p) {
        const Prompt& prompt = *prompts[p];
        Group& g = groups[p];
        g.seed = prompt.scene.seed;
        g.difficulty = prompt.scene.difficulty;
        g.members.reserve(cfg.group_size);
        for (int m = 0; m < cfg.group_size; ++m) {
          const std::uint64_t ep_seed = derive_seed(
              seed, {0xE915, static_cast<std::uint64_t>(step), p, static_cast<std::uint64_t>(m)});
          Trajectory traj = run_episode(policy, prompt.scene, prompt.qa, rollout_cfg, ep_seed);
          RewardBreakdown rb = total_reward(traj, prompt.scene, reward_cfg);
          g.members.push_back(ScoredTrajectory{std::move(traj), std::move(rb)});
        }
      }
    };

    const std::size_t workers =
        std::clamp<std::size_t>(static_cast<std::size_t>(std::max(cfg.num_threads, 1)), 1, prompts.size());
    if (workers <= 1) {
      collect(0, prompts.size());
    } else {
      std::vector<std::thread> pool;
      const std::size_t chunk = (prompts.size() + workers - 1) / workers;
      for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t b = w * chunk;
        const std::size_t e = std::min(prompts.size(), b + chunk);
        if (b < e) pool.emplace_back(collect, b, e);
      }
      for (auto& t : pool) t.join();
    }

    UpdateResult upd = masked_pg_update(groups, result.params, cfg);
    upd.stats.step = step;
    result.params = std::move(upd.params);
    result.log.push_back(upd.stats);
  }
  return result;
}

std::string stats_csv(const std::vector<TrainStats>& log) {
  std::ostringstream out;
  out.precision(10);
  out << "step,mean_reward,success_rate_train,mean_T,mean_pairwise_iou_incorrect,"
         "penalty_activation_rate\n";
  for (const TrainStats& s : log) {
    out << s.step << ',' << s.mean_reward << ',' << s.success_rate << ',' << s.mean_T << ',';
    if (s.mean_pairwise_iou_incorrect) out << *s.mean_pairwise_iou_incorrect;
    out << ',' << s.penalty_activation_rate << '\n';
  }
  return out.str();
}

std::size_t ExpertDataset::decision_count() const {
  std::size_t n = 0;
  for (const Item& it : items) {
    for (const Step& s : it.traj.steps) n += (s.is_model_action && !s.record.empty()) ? 1 : 0;
  }
  return n;
}

ExpertDataset build_expert_dataset(const std::vector<DatasetRecord>& records,
                                   const RolloutConfig& rollout_cfg) {
  ExpertDataset data;
  data.items.reserve(records.size());
  const MultiScaleExpertPolicy expert;
  for (const DatasetRecord& rec : records) {
    const Scene scene = generate_scene(rec.seed, rec.difficulty, rollout_cfg.synth);
    const QAPair qa = make_qa(scene);
    Trajectory traj = run_episode(expert, scene, qa, rollout_cfg, derive_seed(rec.seed, {0xE7}));
    if (accuracy_reward(traj, scene) != 1) {
      throw Error(ErrorCode::kPrecondition,
                  "expert failed on seed " + std::to_string(rec.seed) + "; scene is unsolvable");
    }
    data.items.push_back(ExpertDataset::Item{rec, std::move(traj)});
  }
  return data;
}

double bc_loss(const ExpertDataset& data, const PolicyParams& params) {
  double nll = 0.0;
  std::size_t n = 0;
  for (const auto& it : data.items) {
    for (const Step& s : it.traj.steps) {
      if (!s.is_model_action || s.record.empty()) continue;
      nll -= log_prob(params, s.record.features, s.record.action);
      ++n;
    }
  }
  return n == 0 ? 0.0 : nll / static_cast<double>(n);
}

CloneResult behavior_clone(const ExpertDataset& data, const PolicyParams& init, int epochs,
                           double learning_rate) {
  const std::size_t n = data.decision_count();
  if (data.items.empty() || n == 0) throw Error(ErrorCode::kEmptyDataset, "expert dataset is empty");
  CloneResult out{init, {}};
  double loss = bc_loss(data, out.params);
  double lr = learning_rate;
  const double inv_n = 1.0 / static_cast<double>(n);

  for (int epoch = 0; epoch < epochs; ++epoch) {
    out.loss_per_epoch.push_back(loss);
    PolicyParams grad = PolicyParams::zeros(init.feature_dim, init.action_count);
    for (const auto& it : data.items) {
      for (const Step& s : it.traj.steps) {
        if (!s.is_model_action || s.record.empty()) continue;
        accumulate_logprob_grad(out.params, s.record.features, s.record.action, inv_n, grad);
      }
    }
    // Backtrack until the step does not raise the loss; keep params otherwise.
    for (int halvings = 0; halvings < 40; ++halvings) {
      PolicyParams trial = out.params;
      trial.axpy(lr, grad);
      const double trial_loss = bc_loss(data, trial);
      if (trial_loss <= loss) {
        out.params = std::move(trial);
        loss = trial_loss;
        break;
      }
      lr *= 0.5;
    }
  }
  out.loss_per_epoch.push_back(loss);
  return out;
}

}  // namespace zoomrl
