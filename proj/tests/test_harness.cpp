#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "zoomrl/error.hpp"
#include "zoomrl/harness.hpp"

using namespace zoomrl;
namespace fs = std::filesystem;

namespace {

std::optional<ErrorCode> config_error(std::string_view text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.train = {0, {5, 5, 20}};
  cfg.eval = {1000, {10, 10, 30}};
  cfg.coldstart = {2000, {5, 5, 10}};
  cfg.write_trajectories = true;
  return cfg;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("config parsing") {
  const ExperimentConfig cfg = parse_config(
      "# comment\n"
      "master_seed = 9\n"
      "lambda = 0.3   # trailing comment\n"
      "\n"
      "eval_hard = 12\n"
      "rl_difficulties = medium, hard\n"
      "ablation_seeds = 4,5\n"
      "variant = C\n"
      "write_trajectories = false\n");
  CHECK(cfg.master_seed == 9);
  CHECK(cfg.reward.lambda == 0.3);
  CHECK(cfg.eval.sizes[2] == 12);
  CHECK(cfg.rl_difficulties == std::vector<Difficulty>{Difficulty::kMedium, Difficulty::kHard});
  CHECK(cfg.ablation_seeds == std::vector<std::uint64_t>{4, 5});
  CHECK(cfg.variant == Variant::kC);
  CHECK_FALSE(cfg.write_trajectories);

  const ExperimentConfig again = parse_config(config_to_text(cfg));
  CHECK(config_to_text(again) == config_to_text(cfg));

  CHECK(config_error("bogus = 1\n") == ErrorCode::kBadConfig);
  CHECK(config_error("lambda 0.2\n") == ErrorCode::kBadConfig);
  CHECK(config_error("lambda = abc\n") == ErrorCode::kBadConfig);
  CHECK(config_error("group_size = 1\n") == ErrorCode::kBadConfig);
  CHECK(config_error("kl_coeff = 0.1\n") == ErrorCode::kBadConfig);
  CHECK(config_error("variant = E\n") == ErrorCode::kBadConfig);
  CHECK(config_error("kl_coeff = 0\n") == std::nullopt);
  try {
    parse_config("master_seed = 1\n\nnope = 2\n");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("variants") {
  ExperimentConfig base;
  base.reward.lambda = 0.2;
  const ExperimentConfig c = with_variant(base, Variant::kC);
  const ExperimentConfig drim = with_variant(base, Variant::kDrim);
  CHECK(c.reward.lambda == 0.0);
  CHECK(drim.reward.lambda == 0.2);
  // C is DRIM with lambda zeroed and nothing else changed.
  ExperimentConfig drim0 = drim;
  drim0.reward.lambda = 0.0;
  drim0.variant = c.variant;
  CHECK(config_to_text(drim0) == config_to_text(c));
  CHECK_FALSE(uses_coldstart(Variant::kA));
  CHECK_FALSE(uses_rl(Variant::kB));
  for (Variant v : kAllVariants) CHECK(parse_variant(to_string(v)) == v);
}

TEST_CASE("split hygiene") {
  ExperimentConfig cfg = small_config();
  CHECK_NOTHROW(check_split_hygiene(cfg));
  cfg.eval.offset = 3;
  try {
    check_split_hygiene(cfg);
    FAIL("expected SplitOverlap");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSplitOverlap);
  }
  CHECK_THROWS_AS(generate_dataset(cfg), Error);

  const ExperimentConfig defaults;
  CHECK_NOTHROW(check_split_hygiene(defaults));
}

TEST_CASE("gen-data is deterministic and hard scenes pass the audit") {
  const ExperimentConfig cfg = small_config();
  TempDir a("zoomrl_gen_a"), b("zoomrl_gen_b");
  const Dataset da = cmd_gen_data(cfg, a.path);
  cmd_gen_data(cfg, b.path);
  for (const auto& entry : fs::directory_iterator(a.path)) {
    CHECK(slurp(entry.path()) == slurp(b.path / entry.path().filename()));
  }
  const auto hard = read_records(a.path / "eval_hard.jsonl");
  CHECK(hard.size() == 30);
  for (const DatasetRecord& r : hard) {
    const Scene s = generate_scene(r.seed, r.difficulty);
    CHECK(r.qa == make_qa(s));
    CHECK_FALSE(legibility_oracle(s, kFullFrame, cfg.rollout.base_resolution));
    CHECK(legibility_oracle(s, s.target().region, cfg.rollout.base_resolution));
  }
  const Dataset back = read_dataset(a.path);
  for (std::size_t d = 0; d < 3; ++d) {
    CHECK(back.train[d] == da.train[d]);
    CHECK(back.eval[d] == da.eval[d]);
    CHECK(back.coldstart[d] == da.coldstart[d]);
  }
  // No eval seed appears in any training split.
  for (const auto& ev : da.eval) {
    for (const auto& e : ev) {
      for (const auto& tr : da.train) {
        for (const auto& t : tr) CHECK(t.seed != e.seed);
      }
    }
  }
}

TEST_CASE("reference policies on the eval split") {
  const ExperimentConfig cfg = small_config();
  const Dataset data = generate_dataset(cfg);
  TempDir out("zoomrl_eval");
  const std::vector<Difficulty> all(kAllDifficulties.begin(), kAllDifficulties.end());
  const EvalReport expert = cmd_eval(cfg, data, "expert", all, out.path / "expert");
  for (const SplitReport& s : expert.splits) CHECK(s.success_rate == 1.0);
  CHECK(fs::exists(out.path / "expert" / "report.json"));
  CHECK(fs::exists(out.path / "expert" / "trajectories_hard.jsonl"));

  const EvalReport osc = cmd_eval(cfg, data, "oscillatory", {Difficulty::kHard}, out.path / "osc");
  REQUIRE(osc.split(Difficulty::kHard) != nullptr);
  CHECK(osc.split(Difficulty::kHard)->mean_pairwise_iou_incorrect.value_or(0.0) > 0.8);
}

TEST_CASE("stage commands and checkpoint evaluation") {
  ExperimentConfig cfg = small_config();
  cfg.bc_epochs = 20;
  cfg.rl_steps = 2;
  cfg.train_cfg.batch_prompts = 4;
  cfg.train_cfg.group_size = 4;
  const Dataset data = generate_dataset(cfg);
  TempDir out("zoomrl_stages");

  const ColdstartResult cold = cmd_coldstart(cfg, data, out.path / "cold");
  CHECK(fs::exists(out.path / "cold" / "params.json"));
  CHECK(load_params(out.path / "cold" / "params.json") == cold.params);

  const RlResult rl = cmd_train_rl(cfg, data, cold.params, out.path / "rl");
  CHECK(rl.log.size() == 2);
  CHECK(fs::exists(out.path / "rl" / "train_stats.csv"));

  const std::string ckpt = (out.path / "rl" / "params.json").string();
  const EvalReport r1 = cmd_eval(cfg, data, ckpt, {Difficulty::kHard}, out.path / "e1");
  const EvalReport r2 = cmd_eval(cfg, data, ckpt, {Difficulty::kHard}, out.path / "e2");
  CHECK(report_to_json(r1) == report_to_json(r2));
  CHECK(slurp(out.path / "e1" / "trajectories_hard.jsonl") == slurp(out.path / "e2" / "trajectories_hard.jsonl"));
  CHECK(load_params(ckpt) == rl.params);

  CHECK_THROWS_AS(cmd_eval(cfg, data, (out.path / "missing.json").string(), {Difficulty::kHard}, out.path / "e3"),
                  Error);
}

TEST_CASE("ablation summary shape") {
  ExperimentConfig cfg = small_config();
  cfg.bc_epochs = 5;
  cfg.rl_steps = 1;
  cfg.train_cfg.batch_prompts = 2;
  cfg.train_cfg.group_size = 2;
  cfg.ablation_seeds = {1, 2};
  cfg.write_trajectories = false;
  const Dataset data = generate_dataset(cfg);
  TempDir out("zoomrl_ablation");
  const AblationSummary s = cmd_run_ablation(cfg, data, out.path);
  CHECK(s.runs.size() == 8);
  for (const VariantRun& r : s.runs) CHECK(r.report.splits.size() == 3);
  const std::string md = summary_markdown(s);
  int rows = 0;
  for (Variant v : kAllVariants) rows += md.find("| " + std::string(to_string(v)) + " |") != std::string::npos;
  CHECK(rows == 4);
  CHECK(fs::exists(out.path / "summary.md"));
  CHECK(fs::exists(out.path / "seed_2" / "DRIM" / "report.json"));
  // B and C start from the same cold-start checkpoint.
  CHECK(load_params(out.path / "seed_1" / "B" / "params.json") ==
        load_params(out.path / "seed_1" / "coldstart" / "params.json"));
}
