#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "metatrial/trainer/trainer.hpp"

namespace metatrial {

using json = nlohmann::json;

inline json to_json(const TaskInstance& t) {
  return {{"kind", to_string(t.env_kind)}, {"board_size", t.board_size}, {"difficulty", t.difficulty},
          {"seed", t.seed},                {"max_steps", t.max_steps},   {"interior_walls", t.interior_walls}};
}

inline TaskInstance task_from_json(const json& j) {
  TaskInstance t;
  t.env_kind = parse_env_kind(j.at("kind").get<std::string>());
  t.board_size = j.at("board_size").get<int>();
  t.difficulty = j.at("difficulty").get<int>();
  t.seed = j.at("seed").get<std::uint64_t>();
  t.max_steps = j.at("max_steps").get<int>();
  t.interior_walls = j.at("interior_walls").get<int>();
  return t;
}

inline json to_json(const TrainConfig& c) {
  return {{"mode", to_string(c.mode)},
          {"group_size", c.group_size},
          {"episodes_per_trial", c.episodes_per_trial},
          {"gamma_step", c.discount.gamma_step},
          {"gamma_traj", c.discount.gamma_traj},
          {"estimator", to_string(c.estimator)},
          {"learning_rate", c.learning_rate},
          {"grad_clip", c.grad_clip},
          {"momentum", c.momentum},
          {"batch_tasks", c.batch_tasks},
          {"epochs", c.epochs},
          {"rollout_temperature", c.rollout_temperature},
          {"memory_mode", to_string(c.memory_mode)},
          {"threads", c.threads}};
}

inline TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  c.mode = parse_train_mode(j.at("mode").get<std::string>());
  c.group_size = j.at("group_size").get<int>();
  c.episodes_per_trial = j.at("episodes_per_trial").get<int>();
  c.discount.gamma_step = j.at("gamma_step").get<double>();
  c.discount.gamma_traj = j.at("gamma_traj").get<double>();
  c.estimator = parse_estimator(j.at("estimator").get<std::string>());
  c.learning_rate = j.at("learning_rate").get<double>();
  c.grad_clip = j.at("grad_clip").get<double>();
  c.momentum = j.at("momentum").get<double>();
  c.batch_tasks = j.at("batch_tasks").get<int>();
  c.epochs = j.at("epochs").get<int>();
  c.rollout_temperature = j.at("rollout_temperature").get<double>();
  c.memory_mode = parse_memory_mode(j.at("memory_mode").get<std::string>());
  c.threads = j.at("threads").get<unsigned>();
  return c;
}

inline json to_json(const EpochMetrics& m) {
  return {{"epoch", m.epoch},         {"mean_objective", m.mean_objective}, {"success_rate", m.success_rate},
          {"mean_episodes", m.mean_episodes}, {"grad_norm", m.grad_norm},   {"episodes", m.episodes}};
}

inline EpochMetrics metrics_from_json(const json& j) {
  EpochMetrics m;
  m.epoch = j.at("epoch").get<int>();
  m.mean_objective = j.at("mean_objective").get<double>();
  m.success_rate = j.at("success_rate").get<double>();
  m.mean_episodes = j.at("mean_episodes").get<double>();
  m.grad_norm = j.at("grad_norm").get<double>();
  m.episodes = j.at("episodes").get<std::size_t>();
  return m;
}

// Doubles are written in shortest round-trip form, so a reload is exact.
inline json to_json(const Checkpoint& cp) {
  return {{"format", "metatrial.checkpoint"},
          {"format_version", Checkpoint::kFormatVersion},
          {"params",
           {{"kind", to_string(cp.params.kind)},
            {"board_size", cp.params.board_size},
            {"version", cp.params.version},
            {"theta", cp.params.theta}}},
          {"velocity", cp.velocity},
          {"epoch", cp.epoch},
          {"root_seed", cp.root_seed},
          {"metrics", to_json(cp.metrics)},
          {"config", to_json(cp.config)},
          {"task_shape", to_json(cp.task_shape)}};
}

inline Checkpoint checkpoint_from_json(const json& j) {
  const int version = j.at("format_version").get<int>();
  if (version > Checkpoint::kFormatVersion)
    throw std::runtime_error("checkpoint format_version " + std::to_string(version) + " is newer than supported (" +
                             std::to_string(Checkpoint::kFormatVersion) + ")");
  Checkpoint cp;
  const auto& p = j.at("params");
  cp.params.kind = parse_env_kind(p.at("kind").get<std::string>());
  cp.params.board_size = p.at("board_size").get<int>();
  cp.params.version = p.at("version").get<std::uint64_t>();
  cp.params.theta = p.at("theta").get<std::vector<double>>();
  const auto expected = static_cast<std::size_t>(feature_dim(cp.params.kind) +
                                                 slot_count(cp.params.kind, cp.params.board_size));
  if (cp.params.theta.size() != expected)
    throw std::runtime_error("checkpoint theta has " + std::to_string(cp.params.theta.size()) + " entries, expected " +
                             std::to_string(expected));
  cp.velocity = j.at("velocity").get<std::vector<double>>();
  cp.epoch = j.at("epoch").get<int>();
  cp.root_seed = j.at("root_seed").get<std::uint64_t>();
  cp.metrics = metrics_from_json(j.at("metrics"));
  cp.config = train_config_from_json(j.at("config"));
  cp.task_shape = task_from_json(j.at("task_shape"));
  return cp;
}

inline void save_checkpoint(const Checkpoint& cp, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out << to_json(cp).dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing checkpoint " + path.string());
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("checkpoint not found: " + path.string());
  try {
    return checkpoint_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed checkpoint " + path.string() + ": " + e.what());
  }
}

}  // namespace metatrial
