#pragma once

#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "metatrial/core/error.hpp"
#include "metatrial/env/types.hpp"
#include "metatrial/eval/pass_at_k.hpp"
#include "metatrial/trainer/config.hpp"

namespace metatrial {

enum class Backend { Parametric, Llm };

inline std::string_view to_string(Backend b) { return b == Backend::Parametric ? "parametric" : "llm"; }

inline Backend parse_backend(std::string_view s) {
  if (s == "parametric") return Backend::Parametric;
  if (s == "llm") return Backend::Llm;
  throw std::invalid_argument("unknown backend '" + std::string(s) + "'");
}

struct EvalSettings {
  EvalOptions options;
  int tasks = 256;           // held-out tasks per report
  int diversity_samples = 8;
  std::vector<int> sweep_axis;

  friend bool operator==(const EvalSettings&, const EvalSettings&) = default;
};

struct LlmSettings {
  std::string base_url = "http://127.0.0.1:8000/v1";
  std::string model;
  std::string api_key_env = "OPENAI_API_KEY";  // empty: no Authorization header
  int max_output_tokens = 1024;
  double timeout_seconds = 60.0;
  int retries = 3;           // transport retries after the first attempt
  int max_attempts = 3;      // queries per decision on malformed output
  int max_concurrency = 4;
  int num_actions_per_turn = 1;

  friend bool operator==(const LlmSettings&, const LlmSettings&) = default;
};

struct RunConfig {
  static constexpr int kSchemaVersion = 1;
  std::string output_dir = "runs/default";
  std::uint64_t root_seed = 0;
  Backend backend = Backend::Parametric;
  bool log_trajectories = false;
  int checkpoint_every = 0;  // epochs between checkpoints, 0: final only
  bool matched_rl = false;
  TaskInstance environment = make_task(EnvKind::MineSweeper, 6, 3, 0);
  TrainConfig train;
  EvalSettings eval;
  LlmSettings llm;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace detail {

inline int line_of(const YAML::Node& node) { return node.Mark().is_null() ? -1 : node.Mark().line + 1; }

// Reads the keys of one mapping, rejecting any that are not listed.
class Section {
 public:
  Section(const YAML::Node& node, std::string name, std::set<std::string> allowed)
      : node_(node), name_(std::move(name)) {
    if (!node_.IsMap()) throw ConfigError(name_ + " must be a mapping", line_of(node_));
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) throw ConfigError("unknown key '" + qualified(key) + "'", line_of(kv.first));
    }
  }

  template <class T, class Check = std::nullptr_t>
  void get(const std::string& key, T& out, Check check = nullptr) const {
    const YAML::Node v = node_[key];
    if (!v) return;
    try {
      out = v.as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError(qualified(key) + " has the wrong type", line_of(v));
    }
    if constexpr (!std::is_same_v<Check, std::nullptr_t>) {
      if (const auto problem = check(out)) throw ConfigError(qualified(key) + " " + *problem, line_of(v));
    }
  }

  template <class T, class Parse>
  void get_enum(const std::string& key, T& out, Parse parse) const {
    std::string s;
    get(key, s);
    if (!node_[key]) return;
    try {
      out = parse(s);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(qualified(key) + ": " + e.what(), line_of(node_[key]));
    }
  }

  YAML::Node child(const std::string& key) const { return node_[key]; }
  int line(const std::string& key) const { return node_[key] ? line_of(node_[key]) : line_of(node_); }

 private:
  std::string qualified(const std::string& key) const { return name_.empty() ? key : name_ + "." + key; }
  YAML::Node node_;
  std::string name_;
};

using Problem = std::optional<std::string>;

inline auto unit_interval() {
  return [](double v) -> Problem {
    if (v >= 0.0 && v <= 1.0) return std::nullopt;
    std::ostringstream s;
    s << "= " << v << " is outside the valid range [0, 1]";
    return s.str();
  };
}
template <class T>
auto at_least(T lo) {
  return [lo](T v) -> Problem {
    if (v >= lo) return std::nullopt;
    std::ostringstream s;
    s << "= " << v << " must be at least " << lo;
    return s.str();
  };
}
inline auto positive() {
  return [](double v) -> Problem {
    if (v > 0.0) return std::nullopt;
    std::ostringstream s;
    s << "= " << v << " must be positive";
    return s.str();
  };
}

}  // namespace detail

/// Parses a YAML run configuration. Every diagnostic carries the 1-based
/// line of the offending key or value.
inline RunConfig parse_run_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.msg, e.mark.line + 1);
  }
  if (!root || root.IsNull()) throw ConfigError("empty configuration");
  using detail::Section;
  const Section top(root, "",
                    {"schema_version", "output_dir", "root_seed", "backend", "log_trajectories", "checkpoint_every",
                     "matched_rl", "environment", "train", "eval", "llm"});
  int version = -1;
  top.get("schema_version", version);
  if (version != RunConfig::kSchemaVersion)
    throw ConfigError("schema_version must be " + std::to_string(RunConfig::kSchemaVersion), top.line("schema_version"));

  RunConfig c;
  top.get("output_dir", c.output_dir);
  top.get("root_seed", c.root_seed);
  top.get_enum("backend", c.backend, parse_backend);
  top.get("log_trajectories", c.log_trajectories);
  top.get("checkpoint_every", c.checkpoint_every, detail::at_least(0));
  top.get("matched_rl", c.matched_rl);

  if (const auto node = top.child("environment")) {
    const Section env(node, "environment", {"kind", "board_size", "difficulty", "max_steps", "interior_walls"});
    env.get_enum("kind", c.environment.env_kind, parse_env_kind);
    env.get("board_size", c.environment.board_size, detail::at_least(2));
    c.environment.max_steps = default_max_steps(c.environment.env_kind, c.environment.board_size);
    env.get("difficulty", c.environment.difficulty, detail::at_least(1));
    env.get("max_steps", c.environment.max_steps, detail::at_least(1));
    env.get("interior_walls", c.environment.interior_walls, detail::at_least(0));
    try {
      validate_task(c.environment);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("environment: ") + e.what(), detail::line_of(node));
    }
  }

  if (const auto node = top.child("train")) {
    const Section tr(node, "train",
                     {"mode", "group_size", "episodes_per_trial", "gamma_step", "gamma_traj", "estimator",
                      "learning_rate", "grad_clip", "momentum", "batch_tasks", "epochs", "rollout_temperature",
                      "memory_mode", "threads"});
    auto& t = c.train;
    tr.get_enum("mode", t.mode, parse_train_mode);
    tr.get("group_size", t.group_size, detail::at_least(1));
    tr.get("episodes_per_trial", t.episodes_per_trial, detail::at_least(1));
    tr.get("gamma_step", t.discount.gamma_step, detail::unit_interval());
    tr.get("gamma_traj", t.discount.gamma_traj, detail::unit_interval());
    tr.get_enum("estimator", t.estimator, parse_estimator);
    tr.get("learning_rate", t.learning_rate, detail::positive());
    tr.get("grad_clip", t.grad_clip, detail::at_least(0.0));
    tr.get("momentum", t.momentum, [](double v) -> detail::Problem {
      if (v >= 0.0 && v < 1.0) return std::nullopt;
      return "must lie in [0, 1)";
    });
    tr.get("batch_tasks", t.batch_tasks, detail::at_least(1));
    tr.get("epochs", t.epochs, detail::at_least(1));
    tr.get("rollout_temperature", t.rollout_temperature, detail::positive());
    tr.get_enum("memory_mode", t.memory_mode, parse_memory_mode);
    tr.get("threads", t.threads);
    try {
      t.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("train: ") + e.what(), detail::line_of(node));
    }
  }

  if (const auto node = top.child("eval")) {
    const Section ev(node, "eval",
                     {"k", "protocol", "memory_mode", "temperature", "reflection_temperature", "seed", "threads",
                      "tasks", "diversity_samples", "sweep_axis"});
    auto& e = c.eval;
    ev.get("k", e.options.k_max, detail::at_least(1));
    ev.get_enum("protocol", e.options.protocol, parse_protocol);
    ev.get_enum("memory_mode", e.options.memory_mode, parse_memory_mode);
    ev.get("temperature", e.options.temperature, detail::positive());
    if (ev.child("reflection_temperature")) {
      double v = 0.0;
      ev.get("reflection_temperature", v, detail::positive());
      e.options.reflection_temperature = v;
    }
    ev.get("seed", e.options.seed);
    ev.get("threads", e.options.threads);
    ev.get("tasks", e.tasks, detail::at_least(1));
    ev.get("diversity_samples", e.diversity_samples, detail::at_least(2));
    ev.get("sweep_axis", e.sweep_axis, [](const std::vector<int>& axis) -> detail::Problem {
      for (std::size_t i = 1; i < axis.size(); ++i)
        if (axis[i] <= axis[i - 1]) return "must be strictly increasing";
      return std::nullopt;
    });
  }

  if (const auto node = top.child("llm")) {
    const Section ll(node, "llm",
                     {"base_url", "model", "api_key_env", "max_output_tokens", "timeout_seconds", "retries",
                      "max_attempts", "max_concurrency", "num_actions_per_turn"});
    auto& l = c.llm;
    ll.get("base_url", l.base_url);
    ll.get("model", l.model);
    ll.get("api_key_env", l.api_key_env);
    ll.get("max_output_tokens", l.max_output_tokens, detail::at_least(1));
    ll.get("timeout_seconds", l.timeout_seconds, detail::positive());
    ll.get("retries", l.retries, detail::at_least(0));
    ll.get("max_attempts", l.max_attempts, detail::at_least(1));
    ll.get("max_concurrency", l.max_concurrency, detail::at_least(1));
    ll.get("num_actions_per_turn", l.num_actions_per_turn, detail::at_least(1));
  }
  return c;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_run_config(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

/// YAML text that parses back to an equal RunConfig.
inline std::string serialize_run_config(const RunConfig& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "schema_version" << YAML::Value << RunConfig::kSchemaVersion;
  out << YAML::Key << "output_dir" << YAML::Value << YAML::DoubleQuoted << c.output_dir;
  out << YAML::Key << "root_seed" << YAML::Value << c.root_seed;
  out << YAML::Key << "backend" << YAML::Value << std::string(to_string(c.backend));
  out << YAML::Key << "log_trajectories" << YAML::Value << c.log_trajectories;
  out << YAML::Key << "checkpoint_every" << YAML::Value << c.checkpoint_every;
  out << YAML::Key << "matched_rl" << YAML::Value << c.matched_rl;

  out << YAML::Key << "environment" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << std::string(to_string(c.environment.env_kind));
  out << YAML::Key << "board_size" << YAML::Value << c.environment.board_size;
  out << YAML::Key << "difficulty" << YAML::Value << c.environment.difficulty;
  out << YAML::Key << "max_steps" << YAML::Value << c.environment.max_steps;
  out << YAML::Key << "interior_walls" << YAML::Value << c.environment.interior_walls;
  out << YAML::EndMap;

  const auto& t = c.train;
  out << YAML::Key << "train" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "mode" << YAML::Value << std::string(to_string(t.mode));
  out << YAML::Key << "group_size" << YAML::Value << t.group_size;
  out << YAML::Key << "episodes_per_trial" << YAML::Value << t.episodes_per_trial;
  out << YAML::Key << "gamma_step" << YAML::Value << t.discount.gamma_step;
  out << YAML::Key << "gamma_traj" << YAML::Value << t.discount.gamma_traj;
  out << YAML::Key << "estimator" << YAML::Value << std::string(to_string(t.estimator));
  out << YAML::Key << "learning_rate" << YAML::Value << t.learning_rate;
  out << YAML::Key << "grad_clip" << YAML::Value << t.grad_clip;
  out << YAML::Key << "momentum" << YAML::Value << t.momentum;
  out << YAML::Key << "batch_tasks" << YAML::Value << t.batch_tasks;
  out << YAML::Key << "epochs" << YAML::Value << t.epochs;
  out << YAML::Key << "rollout_temperature" << YAML::Value << t.rollout_temperature;
  out << YAML::Key << "memory_mode" << YAML::Value << std::string(to_string(t.memory_mode));
  out << YAML::Key << "threads" << YAML::Value << t.threads;
  out << YAML::EndMap;

  const auto& e = c.eval;
  out << YAML::Key << "eval" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "k" << YAML::Value << e.options.k_max;
  out << YAML::Key << "protocol" << YAML::Value << std::string(to_string(e.options.protocol));
  out << YAML::Key << "memory_mode" << YAML::Value << std::string(to_string(e.options.memory_mode));
  out << YAML::Key << "temperature" << YAML::Value << e.options.temperature;
  if (e.options.reflection_temperature)
    out << YAML::Key << "reflection_temperature" << YAML::Value << *e.options.reflection_temperature;
  out << YAML::Key << "seed" << YAML::Value << e.options.seed;
  out << YAML::Key << "threads" << YAML::Value << e.options.threads;
  out << YAML::Key << "tasks" << YAML::Value << e.tasks;
  out << YAML::Key << "diversity_samples" << YAML::Value << e.diversity_samples;
  out << YAML::Key << "sweep_axis" << YAML::Value << YAML::Flow << e.sweep_axis;
  out << YAML::EndMap;

  const auto& l = c.llm;
  out << YAML::Key << "llm" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "base_url" << YAML::Value << YAML::DoubleQuoted << l.base_url;
  out << YAML::Key << "model" << YAML::Value << YAML::DoubleQuoted << l.model;
  out << YAML::Key << "api_key_env" << YAML::Value << YAML::DoubleQuoted << l.api_key_env;
  out << YAML::Key << "max_output_tokens" << YAML::Value << l.max_output_tokens;
  out << YAML::Key << "timeout_seconds" << YAML::Value << l.timeout_seconds;
  out << YAML::Key << "retries" << YAML::Value << l.retries;
  out << YAML::Key << "max_attempts" << YAML::Value << l.max_attempts;
  out << YAML::Key << "max_concurrency" << YAML::Value << l.max_concurrency;
  out << YAML::Key << "num_actions_per_turn" << YAML::Value << l.num_actions_per_turn;
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace metatrial
