#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "metatrial/eval/diversity.hpp"
#include "metatrial/eval/pass_at_k.hpp"
#include "metatrial/eval/sweep.hpp"
#include "metatrial/harness/checkpoint_io.hpp"
#include "metatrial/harness/http_client.hpp"
#include "metatrial/harness/records.hpp"
#include "metatrial/harness/run_config.hpp"
#include "metatrial/policy/text_policy.hpp"
#include "metatrial/trainer/experience.hpp"
#include "metatrial/trainer/trainer.hpp"

namespace metatrial {

namespace fs = std::filesystem;

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Timestamps live here and nowhere else, so every other artifact of a
// re-run is byte-identical.
struct Manifest {
  std::string command;
  std::string started_at = utc_timestamp();
  std::vector<std::string> files;

  void write(const fs::path& dir) const {
    write_json_file(dir / "manifest.json",
                    {{"command", command}, {"started_at", started_at}, {"finished_at", utc_timestamp()},
                     {"files", files}});
  }
};

// Exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

namespace cli {

struct TrainArgs {
  std::string config;
  std::string mode;
  bool matched_rl = false;
  std::optional<int> epochs;
  std::string output;
  std::string resume;
};

struct EvalArgs {
  std::string config;
  std::string checkpoint;
  std::string output;
  std::optional<int> k;
  std::string protocol;
  std::string memory_mode;
  std::optional<int> tasks;
  std::optional<int> samples;
  std::optional<std::uint64_t> seed;
  std::vector<int> axis;
};

struct ExportArgs {
  std::string config;
  std::string checkpoint;
  std::string output;
  int batches = 1;
};

inline void run_training(const RunConfig& run, const TrainConfig& train, const fs::path& dir,
                         const std::optional<Checkpoint>& from, const std::string& command, std::ostream& out) {
  fs::create_directories(dir);
  Manifest manifest{command, utc_timestamp(), {}};

  RunConfig resolved = run;
  resolved.train = train;
  resolved.output_dir = dir.string();
  {
    auto f = open_output(dir / "config.yaml");
    f << serialize_run_config(resolved);
  }
  manifest.files.push_back("config.yaml");

  Trainer trainer = from ? Trainer::resume(*from)
                         : Trainer(train, run.environment, PolicyParams::zeros(run.environment.env_kind,
                                                                               run.environment.board_size),
                                   run.root_seed);
  trainer.keep_batches(run.log_trajectories);

  auto metrics = open_output(dir / "metrics.csv");
  write_metrics_header(metrics);
  manifest.files.push_back("metrics.csv");
  std::optional<std::ofstream> traj_file;
  std::optional<TrajectoryWriter> traj;
  if (run.log_trajectories) {
    traj_file = open_output(dir / "trajectories.jsonl");
    traj.emplace(*traj_file);
    manifest.files.push_back("trajectories.jsonl");
  }

  const int epochs = from ? std::max(train.epochs, from->epoch) : train.epochs;
  while (trainer.epoch() < epochs) {
    const EpochMetrics m = trainer.run_epoch();
    write_metrics_row(metrics, m);
    if (traj) traj->write(trainer.last_batch(), m.epoch);
    if (run.checkpoint_every > 0 && trainer.epoch() % run.checkpoint_every == 0) {
      std::ostringstream name;
      name << "checkpoints/epoch_" << std::setw(5) << std::setfill('0') << trainer.epoch() << ".json";
      save_checkpoint(trainer.checkpoint(), dir / name.str());
      manifest.files.push_back(name.str());
    }
  }
  metrics.flush();
  save_checkpoint(trainer.checkpoint(), dir / "checkpoint.json");
  manifest.files.push_back("checkpoint.json");
  manifest.write(dir);

  const auto& last = trainer.checkpoint().metrics;
  out << to_string(trainer.config().mode) << " run: " << trainer.epoch() << " epochs, final success rate "
      << std::fixed << std::setprecision(4) << last.success_rate << ", mean objective " << last.mean_objective
      << std::defaultfloat << "\n  -> " << (dir / "checkpoint.json").string() << '\n';
}

inline int train(const TrainArgs& a, const std::string& command, std::ostream& out) {
  RunConfig run = a.config.empty() ? RunConfig{} : load_run_config(a.config);
  std::optional<Checkpoint> from;
  if (!a.resume.empty()) {
    from = load_checkpoint(a.resume);
    run.train = from->config;
    run.environment = from->task_shape;
    run.root_seed = from->root_seed;
  }
  if (!a.mode.empty()) run.train.mode = parse_train_mode(a.mode);
  if (a.matched_rl) run.matched_rl = true;
  if (a.epochs) run.train.epochs = *a.epochs;
  if (!a.output.empty()) run.output_dir = a.output;
  if (from) from->config.epochs = run.train.epochs;
  if (run.backend != Backend::Parametric) throw ConfigError("training needs backend: parametric");
  run.train.validate();

  const fs::path dir = run.output_dir;
  if (run.matched_rl) {
    if (run.train.mode != TrainMode::MetaRL) throw ConfigError("--matched-rl pairs a meta run with its RL twin");
    if (from) throw ConfigError("--matched-rl cannot be combined with --resume");
    const auto [rl, meta] = matched_budget_pair(run.train);
    run_training(run, meta, dir, std::nullopt, command, out);
    run_training(run, rl, dir / "matched_rl", std::nullopt, command, out);
  } else {
    run_training(run, run.train, dir, from, command, out);
  }
  return kExitOk;
}

struct EvalSetup {
  RunConfig run;
  TaskInstance shape;
  std::unique_ptr<TextCompletionClient> client;
  std::unique_ptr<PolicyBackend> policy;
  fs::path dir;
};

inline EvalSetup prepare_eval(const EvalArgs& a) {
  EvalSetup s;
  const bool have_config = !a.config.empty();
  if (have_config) s.run = load_run_config(a.config);
  std::optional<Checkpoint> cp;
  if (s.run.backend == Backend::Parametric) {
    if (a.checkpoint.empty()) throw std::runtime_error("--checkpoint is required for the parametric backend");
    cp = load_checkpoint(a.checkpoint);
  }
  s.shape = have_config || !cp ? s.run.environment : cp->task_shape;
  if (cp) {
    if (cp->params.kind != s.shape.env_kind || cp->params.board_size != s.shape.board_size)
      throw ConfigError("checkpoint was trained on a different environment or board size");
    s.policy = std::make_unique<ParametricPolicy>(std::make_shared<const PolicyParams>(cp->params));
  } else {
    s.client = std::make_unique<HttpCompletionClient>(s.run.llm);
    TextPolicyOptions opts;
    opts.max_attempts = s.run.llm.max_attempts;
    opts.max_output_tokens = s.run.llm.max_output_tokens;
    opts.prompt.num_actions_per_turn = s.run.llm.num_actions_per_turn;
    s.policy = std::make_unique<TextPolicy>(*s.client, opts);
  }

  auto& o = s.run.eval.options;
  if (a.k) o.k_max = *a.k;
  if (!a.protocol.empty()) o.protocol = parse_protocol(a.protocol);
  if (!a.memory_mode.empty()) o.memory_mode = parse_memory_mode(a.memory_mode);
  if (a.seed) o.seed = *a.seed;
  if (a.tasks) s.run.eval.tasks = *a.tasks;
  if (a.samples) s.run.eval.diversity_samples = *a.samples;
  if (!a.axis.empty()) s.run.eval.sweep_axis = a.axis;

  if (!a.output.empty())
    s.dir = a.output;
  else if (have_config)
    s.dir = s.run.output_dir;
  else
    s.dir = fs::path(a.checkpoint).parent_path();
  if (s.dir.empty()) s.dir = ".";
  fs::create_directories(s.dir);
  return s;
}

inline void print_rates(std::ostream& out, const PassAtKReport& r) {
  out << std::fixed << std::setprecision(4);
  for (std::size_t i = 0; i < r.k_values.size(); ++i) out << (i ? "  " : "") << "pass@" << r.k_values[i] << ' ' << r.rates[i];
  out << std::defaultfloat << '\n';
}

inline int eval_passk(const EvalArgs& a, const std::string& command, std::ostream& out) {
  auto s = prepare_eval(a);
  const auto tasks = held_out_tasks(s.shape, s.run.eval.tasks);
  const auto report = pass_at_k(tasks, *s.policy, s.run.eval.options);
  {
    auto f = open_output(s.dir / "passk.csv");
    write_passk_csv(f, report);
  }
  write_json_file(s.dir / "passk.json", to_json(report));
  Manifest{command, utc_timestamp(), {"passk.csv", "passk.json"}}.write(s.dir);
  out << to_string(report.protocol) << " protocol, " << report.task_count() << " tasks: ";
  print_rates(out, report);
  return kExitOk;
}

inline int eval_diversity(const EvalArgs& a, const std::string& command, std::ostream& out) {
  auto s = prepare_eval(a);
  const auto tasks = held_out_tasks(s.shape, s.run.eval.tasks);
  const auto& o = s.run.eval.options;
  const auto report = diversity_entropy(tasks, *s.policy, s.run.eval.diversity_samples, o.temperature, o.seed, o.threads);
  {
    auto f = open_output(s.dir / "diversity.csv");
    write_diversity_csv(f, report, tasks);
  }
  write_json_file(s.dir / "diversity.json", to_json(report));
  Manifest{command, utc_timestamp(), {"diversity.csv", "diversity.json"}}.write(s.dir);
  out << "mean trajectory entropy " << std::fixed << std::setprecision(4) << report.mean_entropy << " nats over "
      << tasks.size() << " tasks, " << report.samples << " samples each" << std::defaultfloat << '\n';
  return kExitOk;
}

inline int eval_sweep(const EvalArgs& a, const std::string& command, std::ostream& out) {
  auto s = prepare_eval(a);
  if (s.run.eval.sweep_axis.empty()) throw ConfigError("sweep needs --axis or eval.sweep_axis");
  const auto report = difficulty_sweep(*s.policy, s.shape, s.run.eval.sweep_axis, s.run.eval.tasks, s.run.eval.options);
  {
    auto f = open_output(s.dir / "sweep.csv");
    write_sweep_csv(f, report);
  }
  write_json_file(s.dir / "sweep.json", to_json(report));
  Manifest{command, utc_timestamp(), {"sweep.csv", "sweep.json"}}.write(s.dir);
  for (std::size_t v = 0; v < report.rows.size(); ++v) {
    out << "difficulty " << report.axis[v] << ": ";
    print_rates(out, report.rows[v]);
  }
  return kExitOk;
}

inline int export_batches(const ExportArgs& a, const std::string& command, std::ostream& out) {
  RunConfig run = a.config.empty() ? RunConfig{} : load_run_config(a.config);
  std::optional<Checkpoint> cp;
  std::unique_ptr<TextCompletionClient> client;
  std::unique_ptr<PolicyBackend> policy;
  TrainConfig train = run.train;
  TaskInstance shape = run.environment;
  std::uint64_t root = run.root_seed;
  int epoch = 0;
  if (run.backend == Backend::Parametric) {
    if (a.checkpoint.empty()) throw std::runtime_error("--checkpoint is required for the parametric backend");
    cp = load_checkpoint(a.checkpoint);
    if (a.config.empty()) {
      train = cp->config;
      shape = cp->task_shape;
      root = cp->root_seed;
    }
    epoch = cp->epoch;
    policy = std::make_unique<ParametricPolicy>(std::make_shared<const PolicyParams>(cp->params));
  } else {
    client = std::make_unique<HttpCompletionClient>(run.llm);
    TextPolicyOptions opts;
    opts.max_attempts = run.llm.max_attempts;
    opts.max_output_tokens = run.llm.max_output_tokens;
    opts.prompt.num_actions_per_turn = run.llm.num_actions_per_turn;
    policy = std::make_unique<TextPolicy>(*client, opts);
  }
  if (train.mode == TrainMode::RL) train.episodes_per_trial = 1;

  const fs::path path = a.output.empty() ? fs::path(run.output_dir) / "experience.jsonl" : fs::path(a.output);
  auto f = open_output(path);
  JsonlExperienceSink sink(f);
  const auto sampler = training_sampler(shape, root);
  std::size_t total = 0;
  for (int b = 0; b < a.batches; ++b) {
    const auto groups = collect_batch(train, sampler, *policy, epoch + b, root);
    total += export_experience(groups, sink, train.discount.gamma_traj, epoch + b);
  }
  f.flush();
  Manifest{command, utc_timestamp(), {path.filename().string()}}.write(path.has_parent_path() ? path.parent_path() : ".");
  out << total << " experience records -> " << path.string() << '\n';
  return kExitOk;
}

}  // namespace cli

/// Entry point of the metatrial tool. Returns 0 on success, 1 on a runtime
/// failure and 2 on a usage or configuration error.
inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Train and evaluate multi-episode trial policies on grid puzzles"};
  app.name("metatrial");
  app.require_subcommand(1);

  cli::TrainArgs ta;
  auto* train = app.add_subcommand("train", "train a parametric policy");
  train->add_option("--config", ta.config, "run configuration (YAML)");
  train->add_option("--mode", ta.mode, "rl or meta")->check(CLI::IsMember({"rl", "meta"}));
  train->add_flag("--matched-rl", ta.matched_rl, "also train the matched-budget RL twin");
  train->add_option("--epochs", ta.epochs, "override train.epochs")->check(CLI::PositiveNumber);
  train->add_option("--output", ta.output, "override output_dir");
  train->add_option("--resume", ta.resume, "continue from a checkpoint");

  cli::EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  eval->require_subcommand(1);
  auto add_common = [&ea](CLI::App* sub) {
    sub->add_option("--config", ea.config, "run configuration (YAML)");
    sub->add_option("--checkpoint", ea.checkpoint, "checkpoint JSON");
    sub->add_option("--output", ea.output, "report directory");
    sub->add_option("--k", ea.k, "attempts per task")->check(CLI::PositiveNumber);
    sub->add_option("--protocol", ea.protocol, "independent or sequential")
        ->check(CLI::IsMember({"independent", "sequential"}));
    sub->add_option("--memory-mode", ea.memory_mode, "none, trajectory, reflection or both")
        ->check(CLI::IsMember({"none", "trajectory", "reflection", "both"}));
    sub->add_option("--tasks", ea.tasks, "held-out tasks")->check(CLI::PositiveNumber);
    sub->add_option("--seed", ea.seed, "evaluation seed");
  };
  auto* passk = eval->add_subcommand("passk", "pass@k under the independent or sequential protocol");
  add_common(passk);
  auto* diversity = eval->add_subcommand("diversity", "trajectory-diversity entropy");
  add_common(diversity);
  diversity->add_option("--samples", ea.samples, "episodes per task")->check(CLI::Range(2, 1 << 20));
  auto* sweep = eval->add_subcommand("sweep", "pass@k across difficulty values");
  add_common(sweep);
  sweep->add_option("--axis", ea.axis, "difficulty values, e.g. 3,4,5,6")->delimiter(',');

  cli::ExportArgs xa;
  auto* exp = app.add_subcommand("export", "write advantage-annotated experience as JSONL");
  exp->add_option("--config", xa.config, "run configuration (YAML)");
  exp->add_option("--checkpoint", xa.checkpoint, "checkpoint JSON");
  exp->add_option("--output", xa.output, "JSONL path");
  exp->add_option("--batches", xa.batches, "batches to roll out")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  std::string command;
  for (int i = 0; i < argc; ++i) command += (i ? " " : "") + std::string(argv[i]);
  try {
    if (*train) return cli::train(ta, command, out);
    if (*passk) return cli::eval_passk(ea, command, out);
    if (*diversity) return cli::eval_diversity(ea, command, out);
    if (*sweep) return cli::eval_sweep(ea, command, out);
    if (*exp) return cli::export_batches(xa, command, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace metatrial
