// Command line front end: gen-data, coldstart, train-rl, eval, run-ablation.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "zoomrl/error.hpp"
#include "zoomrl/harness.hpp"

namespace {

using namespace zoomrl;

struct Common {
  std::string config;
  std::string out = "out";
  std::string data;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> variant;
  std::optional<double> lambda;
  std::optional<double> epsilon;
  std::optional<int> max_turns;
  std::optional<int> group_size;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "key = value config file");
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--data", c.data, "dataset directory (default: <out>/data, or <out> for gen-data)");
  cmd->add_option("--seed", c.seed, "master seed");
  cmd->add_option("--variant", c.variant, "A, B, C or DRIM");
  cmd->add_option("--lambda", c.lambda, "penalty weight");
  cmd->add_option("--epsilon", c.epsilon, "IoU tolerance");
  cmd->add_option("--max-turns", c.max_turns, "assistant turn limit");
  cmd->add_option("--group-size", c.group_size, "rollouts per prompt");
}

ExperimentConfig resolve(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : load_config(c.config);
  if (c.seed) cfg.master_seed = *c.seed;
  if (c.variant) cfg = with_variant(cfg, parse_variant(*c.variant));
  if (c.lambda) cfg.reward.lambda = *c.lambda;
  if (c.epsilon) cfg.reward.epsilon = *c.epsilon;
  if (c.max_turns) cfg.rollout.max_turns = *c.max_turns;
  if (c.group_size) cfg.train_cfg.group_size = *c.group_size;
  // Re-validate overrides through the config parser.
  return parse_config("", cfg);
}

fs::path data_dir(const Common& c) { return c.data.empty() ? fs::path(c.out) / "data" : fs::path(c.data); }

int fail(std::string_view code, const std::string& message) {
  nlohmann::json line{{"error", code}, {"message", message}};
  std::cerr << line.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"zoom-and-answer RL sandbox"};
  app.require_subcommand(1);

  Common gen_c, cold_c, rl_c, eval_c, abl_c;
  auto* gen = app.add_subcommand("gen-data", "generate train/eval/coldstart splits");
  add_common(gen, gen_c);
  auto* cold = app.add_subcommand("coldstart", "behavior-clone the multi-scale expert");
  add_common(cold, cold_c);
  auto* rl = app.add_subcommand("train-rl", "group-relative policy optimization");
  add_common(rl, rl_c);
  std::string init_path;
  rl->add_option("--init", init_path, "initial params (default: coldstart/params.json under --out, or random for variant A)");
  auto* ev = app.add_subcommand("eval", "greedy evaluation on eval splits");
  add_common(ev, eval_c);
  std::string policy_spec;
  std::string split = "all";
  ev->add_option("--params", policy_spec, "checkpoint path, or expert | immediate | oscillatory")->required();
  ev->add_option("--split", split, "easy | medium | hard | all");
  auto* abl = app.add_subcommand("run-ablation", "train and evaluate variants A, B, C, DRIM over seeds");
  add_common(abl, abl_c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("Usage", e.what());
  }

  try {
    if (gen->parsed()) {
      const ExperimentConfig cfg = resolve(gen_c);
      const fs::path dir = gen_c.data.empty() ? fs::path(gen_c.out) : fs::path(gen_c.data);
      const Dataset d = cmd_gen_data(cfg, dir);
      std::cout << "wrote dataset to " << dir.string() << " (" << d.train[2].size() << " hard train, "
                << d.eval[2].size() << " hard eval)\n";
    } else if (cold->parsed()) {
      const ExperimentConfig cfg = resolve(cold_c);
      const fs::path out = fs::path(cold_c.out) / "coldstart";
      const ColdstartResult r = cmd_coldstart(cfg, read_dataset(data_dir(cold_c)), out);
      std::cout << "bc loss " << r.loss_per_epoch.front() << " -> " << r.loss_per_epoch.back() << "; wrote "
                << (out / "params.json").string() << '\n';
    } else if (rl->parsed()) {
      const ExperimentConfig cfg = resolve(rl_c);
      if (!uses_rl(cfg.variant)) return fail("BadConfig", "variant B does not train with RL");
      PolicyParams init;
      if (!init_path.empty()) init = load_params(init_path);
      else if (uses_coldstart(cfg.variant)) init = load_params(fs::path(rl_c.out) / "coldstart" / "params.json");
      else init = initial_params(cfg);
      const fs::path out = fs::path(rl_c.out) / ("rl_" + std::string(to_string(cfg.variant)));
      const RlResult r = cmd_train_rl(cfg, read_dataset(data_dir(rl_c)), init, out);
      std::cout << "mean reward " << (r.log.empty() ? 0.0 : r.log.front().mean_reward) << " -> "
                << (r.log.empty() ? 0.0 : r.log.back().mean_reward) << "; wrote " << (out / "params.json").string()
                << '\n';
    } else if (ev->parsed()) {
      const ExperimentConfig cfg = resolve(eval_c);
      std::vector<Difficulty> splits;
      if (split == "all") splits.assign(kAllDifficulties.begin(), kAllDifficulties.end());
      else splits.push_back(parse_difficulty(split));
      const EvalReport rep = cmd_eval(cfg, read_dataset(data_dir(eval_c)), policy_spec, splits,
                                      fs::path(eval_c.out) / "eval");
      std::cout << report_to_json(rep) << '\n';
    } else if (abl->parsed()) {
      const ExperimentConfig cfg = resolve(abl_c);
      const fs::path dir = data_dir(abl_c);
      const Dataset data = fs::exists(dir) ? read_dataset(dir) : cmd_gen_data(cfg, dir);
      const AblationSummary s = cmd_run_ablation(cfg, data, fs::path(abl_c.out) / "ablation");
      std::cout << summary_markdown(s);
    }
  } catch (const Error& e) {
    return fail(to_string(e.code()), e.what());
  } catch (const std::exception& e) {
    return fail("Internal", e.what());
  }
  return 0;
}
