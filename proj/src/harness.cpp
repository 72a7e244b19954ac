#include "zoomrl/harness.hpp"

#include <charconv>
#include <chrono>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "zoomrl/error.hpp"
#include "zoomrl/stats.hpp"
#include "zoomrl/trajlog.hpp"

namespace zoomrl {

using nlohmann::ordered_json;

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::kA: return "A";
    case Variant::kB: return "B";
    case Variant::kC: return "C";
    case Variant::kDrim: return "DRIM";
  }
  return "?";
}

Variant parse_variant(std::string_view text) {
  for (Variant v : kAllVariants) {
    if (to_string(v) == text) return v;
  }
  throw Error(ErrorCode::kBadConfig, "unknown variant '" + std::string(text) + "' (expected A, B, C or DRIM)");
}

bool uses_coldstart(Variant v) { return v != Variant::kA; }
bool uses_rl(Variant v) { return v != Variant::kB; }

ExperimentConfig with_variant(ExperimentConfig cfg, Variant v) {
  cfg.variant = v;
  if (v == Variant::kC) cfg.reward.lambda = 0.0;
  return cfg;
}

namespace {

std::string trim(std::string_view s) {
  const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return std::string(s);
}

[[noreturn]] void bad(int line, const std::string& msg) {
  throw Error(ErrorCode::kBadConfig, "config line " + std::to_string(line) + ": " + msg);
}

template <typename T>
T parse_number(const std::string& v, int line, const std::string& key) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad(line, "bad value '" + v + "' for " + key);
  return out;
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : v) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

bool parse_bool(const std::string& v, int line, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad(line, "expected true/false for " + key + ", got '" + v + "'");
}

std::string difficulty_list(const std::vector<Difficulty>& ds) {
  std::string s;
  for (Difficulty d : ds) s += (s.empty() ? "" : ",") + std::string(to_string(d));
  return s;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

std::ofstream open_out(const fs::path& path) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  return f;
}

std::size_t di(Difficulty d) { return static_cast<std::size_t>(d); }

}  // namespace

ExperimentConfig parse_config(std::string_view text, ExperimentConfig cfg) {
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string stripped = trim(raw);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) bad(line, "expected 'key = value'");
    const std::string key = trim(std::string_view(stripped).substr(0, eq));
    const std::string val = trim(std::string_view(stripped).substr(eq + 1));
    if (val.empty()) bad(line, "empty value for " + key);

    const auto u64 = [&] { return parse_number<std::uint64_t>(val, line, key); };
    const auto i32 = [&] { return parse_number<int>(val, line, key); };
    const auto f64 = [&] { return parse_number<double>(val, line, key); };
    const auto split_size = [&](SplitSpec& s, std::string_view suffix) {
      const int n = i32();
      if (n < 0) bad(line, key + " must be >= 0");
      s.sizes[di(parse_difficulty(suffix))] = n;
    };

    if (key == "master_seed") cfg.master_seed = u64();
    else if (key == "data_seed") cfg.data_seed = u64();
    else if (key == "train_offset") cfg.train.offset = u64();
    else if (key == "eval_offset") cfg.eval.offset = u64();
    else if (key == "coldstart_offset") cfg.coldstart.offset = u64();
    else if (key.starts_with("train_") && (key.ends_with("easy") || key.ends_with("medium") || key.ends_with("hard")))
      split_size(cfg.train, std::string_view(key).substr(6));
    else if (key.starts_with("eval_") && (key.ends_with("easy") || key.ends_with("medium") || key.ends_with("hard")))
      split_size(cfg.eval, std::string_view(key).substr(5));
    else if (key.starts_with("coldstart_") && (key.ends_with("easy") || key.ends_with("medium") || key.ends_with("hard")))
      split_size(cfg.coldstart, std::string_view(key).substr(10));
    else if (key == "max_turns") cfg.rollout.max_turns = i32();
    else if (key == "base_resolution") cfg.rollout.base_resolution = i32();
    else if (key == "crop_resolution") cfg.rollout.crop_resolution = i32();
    else if (key == "epsilon") cfg.reward.epsilon = f64();
    else if (key == "lambda") cfg.reward.lambda = f64();
    else if (key == "batch_prompts") cfg.train_cfg.batch_prompts = i32();
    else if (key == "group_size") cfg.train_cfg.group_size = i32();
    else if (key == "learning_rate") cfg.train_cfg.learning_rate = f64();
    else if (key == "std_floor") cfg.train_cfg.std_floor = f64();
    else if (key == "num_threads") cfg.train_cfg.num_threads = i32();
    else if (key == "kl_coeff" || key == "entropy_coeff") {
      if (f64() != 0.0) bad(line, key + " is fixed at 0");
    }
    else if (key == "rl_steps") cfg.rl_steps = i32();
    else if (key == "rl_difficulties") {
      cfg.rl_difficulties.clear();
      for (const auto& d : split_list(val)) cfg.rl_difficulties.push_back(parse_difficulty(d));
    }
    else if (key == "bc_epochs") cfg.bc_epochs = i32();
    else if (key == "bc_learning_rate") cfg.bc_learning_rate = f64();
    else if (key == "init_scale") cfg.init_scale = f64();
    else if (key == "variant") cfg.variant = parse_variant(val);
    else if (key == "ablation_seeds") {
      cfg.ablation_seeds.clear();
      for (const auto& s : split_list(val)) cfg.ablation_seeds.push_back(parse_number<std::uint64_t>(s, line, key));
    }
    else if (key == "write_trajectories") cfg.write_trajectories = parse_bool(val, line, key);
    else bad(line, "unknown key '" + key + "'");
  }

  if (cfg.rollout.max_turns < 1) throw Error(ErrorCode::kBadConfig, "max_turns must be >= 1");
  if (cfg.train_cfg.group_size < 2) throw Error(ErrorCode::kBadConfig, "group_size must be >= 2");
  if (cfg.train_cfg.batch_prompts < 1) throw Error(ErrorCode::kBadConfig, "batch_prompts must be >= 1");
  if (cfg.rl_steps < 0 || cfg.bc_epochs < 0) throw Error(ErrorCode::kBadConfig, "step counts must be >= 0");
  if (cfg.rl_difficulties.empty()) throw Error(ErrorCode::kBadConfig, "rl_difficulties is empty");
  if (cfg.ablation_seeds.empty()) throw Error(ErrorCode::kBadConfig, "ablation_seeds is empty");
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot read config " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

namespace {

// Shortest text that parses back to the same double.
std::string fmt(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

std::string config_to_text(const ExperimentConfig& c) {
  std::ostringstream o;
  o << "master_seed = " << c.master_seed << "\n"
    << "data_seed = " << c.data_seed << "\n";
  const auto split = [&](const char* name, const SplitSpec& s) {
    o << name << "_offset = " << s.offset << "\n";
    for (Difficulty d : kAllDifficulties) o << name << "_" << to_string(d) << " = " << s.sizes[di(d)] << "\n";
  };
  split("train", c.train);
  split("eval", c.eval);
  split("coldstart", c.coldstart);
  o << "max_turns = " << c.rollout.max_turns << "\n"
    << "base_resolution = " << c.rollout.base_resolution << "\n"
    << "crop_resolution = " << c.rollout.crop_resolution << "\n"
    << "epsilon = " << fmt(c.reward.epsilon) << "\n"
    << "lambda = " << fmt(c.reward.lambda) << "\n"
    << "batch_prompts = " << c.train_cfg.batch_prompts << "\n"
    << "group_size = " << c.train_cfg.group_size << "\n"
    << "learning_rate = " << fmt(c.train_cfg.learning_rate) << "\n"
    << "std_floor = " << fmt(c.train_cfg.std_floor) << "\n"
    << "num_threads = " << c.train_cfg.num_threads << "\n"
    << "rl_steps = " << c.rl_steps << "\n"
    << "rl_difficulties = " << difficulty_list(c.rl_difficulties) << "\n"
    << "bc_epochs = " << c.bc_epochs << "\n"
    << "bc_learning_rate = " << fmt(c.bc_learning_rate) << "\n"
    << "init_scale = " << fmt(c.init_scale) << "\n"
    << "variant = " << to_string(c.variant) << "\n"
    << "ablation_seeds = ";
  for (std::size_t i = 0; i < c.ablation_seeds.size(); ++i) o << (i ? "," : "") << c.ablation_seeds[i];
  o << "\nwrite_trajectories = " << (c.write_trajectories ? "true" : "false") << "\n";
  return o.str();
}

std::uint64_t scene_seed(std::uint64_t data_seed, Difficulty d, std::uint64_t index) {
  return derive_seed(data_seed, {0x5CE7E, static_cast<std::uint64_t>(d), index});
}

void check_split_hygiene(const ExperimentConfig& cfg) {
  const std::array<std::pair<const char*, const SplitSpec*>, 3> splits = {
      {{"train", &cfg.train}, {"eval", &cfg.eval}, {"coldstart", &cfg.coldstart}}};
  for (Difficulty d : kAllDifficulties) {
    for (std::size_t i = 0; i < splits.size(); ++i) {
      for (std::size_t j = i + 1; j < splits.size(); ++j) {
        const SplitSpec& a = *splits[i].second;
        const SplitSpec& b = *splits[j].second;
        const std::uint64_t na = static_cast<std::uint64_t>(a.sizes[di(d)]);
        const std::uint64_t nb = static_cast<std::uint64_t>(b.sizes[di(d)]);
        if (na == 0 || nb == 0) continue;
        if (a.offset < b.offset + nb && b.offset < a.offset + na) {
          throw Error(ErrorCode::kSplitOverlap, std::string(splits[i].first) + " and " + splits[j].first +
                                                    " index ranges overlap for " + std::string(to_string(d)));
        }
      }
    }
  }
  // Distinct index ranges give distinct seeds unless the seed hash collides.
  std::set<std::uint64_t> seen;
  for (Difficulty d : kAllDifficulties) {
    for (const auto& [name, spec] : splits) {
      for (int k = 0; k < spec->sizes[di(d)]; ++k) {
        if (!seen.insert(scene_seed(cfg.data_seed, d, spec->offset + k)).second) {
          throw Error(ErrorCode::kSplitOverlap, std::string("scene seed collision in ") + name + " split");
        }
      }
    }
  }
}

Dataset generate_dataset(const ExperimentConfig& cfg) {
  check_split_hygiene(cfg);
  Dataset data;
  const auto fill = [&](const SplitSpec& spec, std::array<std::vector<DatasetRecord>, 3>& dst) {
    for (Difficulty d : kAllDifficulties) {
      auto& v = dst[di(d)];
      v.reserve(spec.sizes[di(d)]);
      for (int k = 0; k < spec.sizes[di(d)]; ++k) {
        const std::uint64_t seed = scene_seed(cfg.data_seed, d, spec.offset + k);
        const Scene scene = generate_scene(seed, d, cfg.rollout.synth);
        v.push_back(DatasetRecord{seed, d, make_qa(scene)});
      }
    }
  };
  fill(cfg.train, data.train);
  fill(cfg.eval, data.eval);
  fill(cfg.coldstart, data.coldstart);
  return data;
}

void write_records(const std::vector<DatasetRecord>& records, const fs::path& path) {
  std::string text;
  for (const auto& r : records) text += to_jsonl(r) + "\n";
  write_text(path, text);
}

std::vector<DatasetRecord> read_records(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot read dataset file " + path.string());
  std::vector<DatasetRecord> out;
  std::string line;
  int n = 0;
  while (std::getline(f, line)) {
    ++n;
    if (trim(line).empty()) continue;
    try {
      out.push_back(dataset_record_from_json(line));
    } catch (const Error& e) {
      throw Error(ErrorCode::kIo, path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

namespace {

fs::path split_file(const fs::path& dir, const char* split, Difficulty d) {
  return dir / (std::string(split) + "_" + std::string(to_string(d)) + ".jsonl");
}

}  // namespace

void write_dataset(const Dataset& data, const fs::path& dir) {
  for (Difficulty d : kAllDifficulties) {
    write_records(data.train[di(d)], split_file(dir, "train", d));
    write_records(data.eval[di(d)], split_file(dir, "eval", d));
    write_records(data.coldstart[di(d)], split_file(dir, "coldstart", d));
  }
}

Dataset read_dataset(const fs::path& dir) {
  Dataset data;
  for (Difficulty d : kAllDifficulties) {
    data.train[di(d)] = read_records(split_file(dir, "train", d));
    data.eval[di(d)] = read_records(split_file(dir, "eval", d));
    data.coldstart[di(d)] = read_records(split_file(dir, "coldstart", d));
  }
  return data;
}

const SplitReport* EvalReport::split(Difficulty d) const {
  for (const auto& s : splits) {
    if (s.difficulty == d) return &s;
  }
  return nullptr;
}

SplitReport evaluate_split(const Policy& policy, const std::vector<DatasetRecord>& records,
                           const RolloutConfig& rollout, const RewardConfig& reward,
                           std::ostream* trajectories) {
  SplitReport rep;
  if (!records.empty()) rep.difficulty = records.front().difficulty;
  double iou_sum = 0.0;
  int iou_n = 0;
  for (const DatasetRecord& rec : records) {
    const Scene scene = generate_scene(rec.seed, rec.difficulty, rollout.synth);
    const Trajectory traj = run_episode(policy, scene, rec.qa, rollout, rec.seed);
    const RewardBreakdown rb = total_reward(traj, scene, reward);
    ++rep.episodes;
    rep.success_rate += rb.r_acc;
    rep.mean_T += rb.T;
    rep.penalty_activation_rate += (rb.penalty_active && rb.gamma_rdn < 0.0) ? 1.0 : 0.0;
    if (rb.r_acc == 0) {
      if (const auto m = mean_pairwise_iou(rb)) {
        rep.incorrect_ious.push_back(*m);
        iou_sum += *m;
        ++iou_n;
      }
    }
    if (trajectories != nullptr) write_trajectory(*trajectories, traj, rb);
  }
  if (rep.episodes > 0) {
    rep.success_rate /= rep.episodes;
    rep.mean_T /= rep.episodes;
    rep.penalty_activation_rate /= rep.episodes;
  }
  if (iou_n > 0) rep.mean_pairwise_iou_incorrect = iou_sum / iou_n;
  return rep;
}

std::string report_to_json(const EvalReport& report) {
  ordered_json j;
  j["policy"] = report.policy;
  j["seeds"] = report.seeds;
  ordered_json splits = ordered_json::array();
  for (const auto& s : report.splits) {
    splits.push_back({{"split", to_string(s.difficulty)},
                      {"episodes", s.episodes},
                      {"success_rate", s.success_rate},
                      {"mean_T", s.mean_T},
                      {"mean_pairwise_iou_incorrect",
                       s.mean_pairwise_iou_incorrect ? ordered_json(*s.mean_pairwise_iou_incorrect) : ordered_json()},
                      {"penalty_activation_rate", s.penalty_activation_rate}});
  }
  j["splits"] = std::move(splits);
  return j.dump(2);
}

Dataset cmd_gen_data(const ExperimentConfig& cfg, const fs::path& out) {
  Dataset data = generate_dataset(cfg);
  write_dataset(data, out);
  return data;
}

PolicyParams initial_params(const ExperimentConfig& cfg) {
  return PolicyParams::random(derive_seed(cfg.master_seed, {0x1417}), cfg.init_scale);
}

namespace {

RolloutConfig training_rollout(const ExperimentConfig& cfg) {
  RolloutConfig rc = cfg.rollout;
  rc.render_observations = false;
  return rc;
}

std::vector<DatasetRecord> all_coldstart(const Dataset& data) {
  std::vector<DatasetRecord> recs;
  for (const auto& v : data.coldstart) recs.insert(recs.end(), v.begin(), v.end());
  return recs;
}

ColdstartResult coldstart_from(const ExperimentConfig& cfg, const ExpertDataset& experts) {
  CloneResult cr = behavior_clone(experts, initial_params(cfg), cfg.bc_epochs, cfg.bc_learning_rate);
  return ColdstartResult{std::move(cr.params), std::move(cr.loss_per_epoch)};
}

void write_coldstart(const ColdstartResult& r, const fs::path& out) {
  save_params(r.params, out / "params.json");
  std::ostringstream csv;
  csv.precision(12);
  csv << "epoch,loss\n";
  for (std::size_t i = 0; i < r.loss_per_epoch.size(); ++i) csv << i << ',' << r.loss_per_epoch[i] << '\n';
  write_text(out / "bc_loss.csv", csv.str());
}

EnvSampler make_sampler(const ExperimentConfig& cfg, const Dataset& data) {
  std::vector<DatasetRecord> recs;
  for (Difficulty d : cfg.rl_difficulties) recs.insert(recs.end(), data.train[di(d)].begin(), data.train[di(d)].end());
  return EnvSampler(recs, cfg.rollout.synth);
}

RlResult train_from(const ExperimentConfig& cfg, const EnvSampler& sampler, const PolicyParams& init) {
  TrainResult tr = train_rl(sampler, init, cfg.train_cfg, cfg.reward, training_rollout(cfg), cfg.rl_steps,
                            derive_seed(cfg.master_seed, {0x4C}));
  return RlResult{std::move(tr.params), std::move(tr.log)};
}

void write_rl(const RlResult& r, const fs::path& out) {
  save_params(r.params, out / "params.json");
  write_text(out / "train_stats.csv", stats_csv(r.log));
}

EvalReport eval_policy(const ExperimentConfig& cfg, const Dataset& data, const Policy& policy,
                       const std::vector<Difficulty>& splits, const fs::path& out, bool write_traj) {
  EvalReport rep;
  rep.policy = policy.name();
  rep.seeds = {cfg.master_seed};
  for (Difficulty d : splits) {
    std::ofstream traj;
    if (write_traj) traj = open_out(out / ("trajectories_" + std::string(to_string(d)) + ".jsonl"));
    rep.splits.push_back(evaluate_split(policy, data.eval[di(d)], cfg.rollout, cfg.reward,
                                        write_traj ? &traj : nullptr));
  }
  write_text(out / "report.json", report_to_json(rep));
  return rep;
}

}  // namespace

ColdstartResult cmd_coldstart(const ExperimentConfig& cfg, const Dataset& data, const fs::path& out) {
  const ExpertDataset experts = build_expert_dataset(all_coldstart(data), training_rollout(cfg));
  ColdstartResult r = coldstart_from(cfg, experts);
  write_coldstart(r, out);
  return r;
}

RlResult cmd_train_rl(const ExperimentConfig& cfg, const Dataset& data, const PolicyParams& init,
                      const fs::path& out) {
  RlResult r = train_from(cfg, make_sampler(cfg, data), init);
  write_rl(r, out);
  return r;
}

EvalReport cmd_eval(const ExperimentConfig& cfg, const Dataset& data, const std::string& policy_spec,
                    const std::vector<Difficulty>& splits, const fs::path& out) {
  if (policy_spec == "expert") return eval_policy(cfg, data, MultiScaleExpertPolicy{}, splits, out, cfg.write_trajectories);
  if (policy_spec == "immediate") return eval_policy(cfg, data, ImmediateAnswerPolicy{}, splits, out, cfg.write_trajectories);
  if (policy_spec == "oscillatory") return eval_policy(cfg, data, OscillatoryPolicy{}, splits, out, cfg.write_trajectories);
  const LinearSoftmaxPolicy policy(load_params(policy_spec), /*greedy=*/true);
  return eval_policy(cfg, data, policy, splits, out, cfg.write_trajectories);
}

AblationSummary cmd_run_ablation(const ExperimentConfig& base, const Dataset& data, const fs::path& out) {
  const auto t0 = std::chrono::steady_clock::now();
  AblationSummary summary;
  const std::vector<Difficulty> splits(kAllDifficulties.begin(), kAllDifficulties.end());
  const ExpertDataset experts = build_expert_dataset(all_coldstart(data), training_rollout(base));
  const EnvSampler sampler = make_sampler(base, data);

  std::vector<double> ious_c, ious_drim;
  for (std::uint64_t seed : base.ablation_seeds) {
    ExperimentConfig seeded = base;
    seeded.master_seed = seed;
    const fs::path seed_dir = out / ("seed_" + std::to_string(seed));
    const ColdstartResult cold = coldstart_from(seeded, experts);
    write_coldstart(cold, seed_dir / "coldstart");

    for (Variant v : kAllVariants) {
      const ExperimentConfig cfg = with_variant(seeded, v);
      const fs::path dir = seed_dir / std::string(to_string(v));
      write_text(dir / "config.txt", config_to_text(cfg));
      VariantRun run{v, seed, {}, {}};
      PolicyParams params = uses_coldstart(v) ? cold.params : initial_params(cfg);
      if (uses_rl(v)) {
        RlResult rl = train_from(cfg, sampler, params);
        write_rl(rl, dir);
        params = std::move(rl.params);
        run.log = std::move(rl.log);
      } else {
        save_params(params, dir / "params.json");
      }
      const LinearSoftmaxPolicy policy(params, /*greedy=*/true);
      run.report = eval_policy(cfg, data, policy, splits, dir, cfg.write_trajectories);
      run.report.policy = "variant " + std::string(to_string(v));
      const SplitReport* hard = run.report.split(Difficulty::kHard);
      if (v == Variant::kC) ious_c.insert(ious_c.end(), hard->incorrect_ious.begin(), hard->incorrect_ious.end());
      if (v == Variant::kDrim) ious_drim.insert(ious_drim.end(), hard->incorrect_ious.begin(), hard->incorrect_ious.end());
      summary.runs.push_back(std::move(run));
    }
  }

  const double n_seeds = static_cast<double>(base.ablation_seeds.size());
  for (const VariantRun& r : summary.runs) {
    for (const SplitReport& s : r.report.splits) {
      summary.mean_success[static_cast<std::size_t>(r.variant)][di(s.difficulty)] += s.success_rate / n_seeds;
    }
  }
  summary.iou_c = mean(ious_c);
  summary.iou_drim = mean(ious_drim);
  summary.mann_whitney_p = mann_whitney_less(ious_drim, ious_c).p_value;
  summary.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  write_text(out / "summary.md", summary_markdown(summary));
  write_text(out / "summary.csv", summary_csv(summary));
  return summary;
}

std::string summary_markdown(const AblationSummary& s) {
  std::ostringstream o;
  o.setf(std::ios::fixed);
  o.precision(1);
  o << "| Variant | Cold-start SFT | Acc reward | Penalty | easy | medium | hard |\n"
    << "|---|---|---|---|---|---|---|\n";
  for (Variant v : kAllVariants) {
    const auto& m = s.mean_success[static_cast<std::size_t>(v)];
    o << "| " << to_string(v) << " | " << (uses_coldstart(v) ? "yes" : "no") << " | "
      << (uses_rl(v) ? "yes" : "no") << " | " << (uses_rl(v) && v != Variant::kC ? "yes" : "no") << " | "
      << 100.0 * m[0] << " | " << 100.0 * m[1] << " | " << 100.0 * m[2] << " |\n";
  }
  o.precision(4);
  o << "\nMean success in percent over " << (s.runs.size() / kAllVariants.size()) << " seeds.\n\n"
    << "Hard split, incorrect episodes with T >= 2: mean pairwise IoU C = " << s.iou_c
    << ", DRIM = " << s.iou_drim << ", one-sided Mann-Whitney p = " << s.mann_whitney_p << ".\n";
  return o.str();
}

std::string summary_csv(const AblationSummary& s) {
  std::ostringstream o;
  o.precision(10);
  o << "variant,seed,split,episodes,success_rate,mean_T,mean_pairwise_iou_incorrect,penalty_activation_rate\n";
  for (const VariantRun& r : s.runs) {
    for (const SplitReport& sp : r.report.splits) {
      o << to_string(r.variant) << ',' << r.seed << ',' << to_string(sp.difficulty) << ',' << sp.episodes << ','
        << sp.success_rate << ',' << sp.mean_T << ',';
      if (sp.mean_pairwise_iou_incorrect) o << *sp.mean_pairwise_iou_incorrect;
      o << ',' << sp.penalty_activation_rate << '\n';
    }
  }
  return o.str();
}

}  // namespace zoomrl
