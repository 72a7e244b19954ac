#pragma once

// Experiment orchestration: dataset splits, cold start, RL, evaluation and
// the A/B/C/DRIM ablation matrix. Every artifact is a pure function of the
// config and the master seed.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "zoomrl/grpo.hpp"

namespace zoomrl {

namespace fs = std::filesystem;

enum class Variant { kA, kB, kC, kDrim };
inline constexpr std::array<Variant, 4> kAllVariants = {Variant::kA, Variant::kB, Variant::kC,
                                                        Variant::kDrim};
std::string_view to_string(Variant v);
Variant parse_variant(std::string_view text);  // throws Error{kBadConfig}

/// Per-difficulty counts, indexed by Difficulty.
using SplitSizes = std::array<int, 3>;

/// A split is a half-open range of scene indices per difficulty; scene seeds
/// are derived from (data_seed, difficulty, index).
struct SplitSpec {
  std::uint64_t offset = 0;
  SplitSizes sizes{};
};

struct ExperimentConfig {
  std::uint64_t master_seed = 1;
  std::uint64_t data_seed = 20240601;
  SplitSpec train{0, {500, 500, 5000}};
  SplitSpec eval{1'000'000, {500, 500, 500}};
  SplitSpec coldstart{2'000'000, {100, 100, 100}};

  RolloutConfig rollout;
  RewardConfig reward;
  TrainConfig train_cfg{.learning_rate = 5.0};
  int rl_steps = 300;
  std::vector<Difficulty> rl_difficulties{Difficulty::kHard};
  int bc_epochs = 40;
  double bc_learning_rate = 5.0;
  double init_scale = 0.01;

  Variant variant = Variant::kDrim;
  std::vector<std::uint64_t> ablation_seeds{1, 2, 3, 4, 5};
  bool write_trajectories = true;
};

/// `key = value` lines; `#` starts a comment; unknown keys are errors.
/// Throws Error{kBadConfig} with the offending line number.
ExperimentConfig parse_config(std::string_view text, ExperimentConfig base = {});
ExperimentConfig load_config(const fs::path& path);
std::string config_to_text(const ExperimentConfig& cfg);

/// Applies the variant's switches: C zeroes lambda; A, B and DRIM keep the
/// configured reward. Cold start and RL on/off are read with uses_*().
ExperimentConfig with_variant(ExperimentConfig cfg, Variant v);
bool uses_coldstart(Variant v);
bool uses_rl(Variant v);

std::uint64_t scene_seed(std::uint64_t data_seed, Difficulty d, std::uint64_t index);

struct Dataset {
  std::array<std::vector<DatasetRecord>, 3> train, eval, coldstart;
};

/// Throws Error{kSplitOverlap} if two splits share an index range or a seed.
void check_split_hygiene(const ExperimentConfig& cfg);

Dataset generate_dataset(const ExperimentConfig& cfg);

/// Writes `<dir>/<split>_<difficulty>.jsonl` for every split and difficulty.
void write_dataset(const Dataset& data, const fs::path& dir);
Dataset read_dataset(const fs::path& dir);

std::vector<DatasetRecord> read_records(const fs::path& path);
void write_records(const std::vector<DatasetRecord>& records, const fs::path& path);

struct SplitReport {
  Difficulty difficulty = Difficulty::kHard;
  int episodes = 0;
  double success_rate = 0.0;
  double mean_T = 0.0;
  std::optional<double> mean_pairwise_iou_incorrect;
  double penalty_activation_rate = 0.0;
  // Per-trajectory mean pairwise IoU of incorrect episodes with T >= 2.
  std::vector<double> incorrect_ious;
};

struct EvalReport {
  std::string policy;
  std::vector<std::uint64_t> seeds;
  std::vector<SplitReport> splits;

  const SplitReport* split(Difficulty d) const;
};

/// Runs `policy` once per record (episode seed = scene seed) and scores it.
/// Trajectories are appended to `trajectories` when non-null.
SplitReport evaluate_split(const Policy& policy, const std::vector<DatasetRecord>& records,
                           const RolloutConfig& rollout, const RewardConfig& reward,
                           std::ostream* trajectories = nullptr);

std::string report_to_json(const EvalReport& report);

// Stage commands. Each returns its main artifact and writes files under `out`.

Dataset cmd_gen_data(const ExperimentConfig& cfg, const fs::path& out);

struct ColdstartResult {
  PolicyParams params;
  std::vector<double> loss_per_epoch;
};
ColdstartResult cmd_coldstart(const ExperimentConfig& cfg, const Dataset& data, const fs::path& out);

PolicyParams initial_params(const ExperimentConfig& cfg);

struct RlResult {
  PolicyParams params;
  std::vector<TrainStats> log;
};
RlResult cmd_train_rl(const ExperimentConfig& cfg, const Dataset& data, const PolicyParams& init,
                      const fs::path& out);

/// `policy_spec` is a checkpoint path or one of `expert`, `immediate`,
/// `oscillatory`. Linear policies act greedily.
EvalReport cmd_eval(const ExperimentConfig& cfg, const Dataset& data, const std::string& policy_spec,
                    const std::vector<Difficulty>& splits, const fs::path& out);

struct VariantRun {
  Variant variant = Variant::kDrim;
  std::uint64_t seed = 0;
  EvalReport report;
  std::vector<TrainStats> log;
};

struct AblationSummary {
  std::vector<VariantRun> runs;
  // Mean success per variant (kAllVariants order) and difficulty.
  std::array<std::array<double, 3>, 4> mean_success{};
  // C vs DRIM on per-trajectory IoU of incorrect hard-split episodes, pooled
  // over seeds; H1: DRIM lower.
  double iou_c = 0.0;
  double iou_drim = 0.0;
  double mann_whitney_p = 1.0;
  double seconds = 0.0;
};

AblationSummary cmd_run_ablation(const ExperimentConfig& cfg, const Dataset& data, const fs::path& out);

std::string summary_markdown(const AblationSummary& s);
std::string summary_csv(const AblationSummary& s);

}  // namespace zoomrl
