#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "metatrial/eval/diversity.hpp"
#include "metatrial/eval/pass_at_k.hpp"
#include "metatrial/eval/sweep.hpp"
#include "metatrial/harness/checkpoint_io.hpp"
#include "metatrial/trainer/experience.hpp"

namespace metatrial {

inline constexpr int kTrajectorySchemaVersion = 1;
inline constexpr int kExperienceSchemaVersion = 1;

// %.17g: fixed, locale-free and exact for doubles.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::ofstream open_output(const std::filesystem::path& path, std::ios::openmode mode = std::ios::trunc) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::out | mode);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

/// Append-only JSONL log of every environment step. The first line is a
/// schema header.
class TrajectoryWriter {
 public:
  explicit TrajectoryWriter(std::ostream& out) : out_(out) {
    out_ << json{{"schema", "metatrial.trajectory"}, {"version", kTrajectorySchemaVersion}}.dump() << '\n';
  }

  void write(const Trial& trial, const std::string& id) {
    const int n = trial.task.board_size;
    for (const auto& ep : trial.episodes)
      for (std::size_t t = 0; t < ep.steps.size(); ++t) {
        const Step& s = ep.steps[t];
        const bool done = t + 1 == ep.steps.size();
        json j{{"trial_id", id},
               {"episode", ep.episode_index},
               {"step", s.index},
               {"obs_text", s.observation.text()},
               {"action", s.action ? json(action_to_string(trial.task.env_kind, n, *s.action)) : json(nullptr)},
               {"reward", s.reward},
               {"done", done},
               {"success", done && ep.success}};
        out_ << j.dump() << '\n';
      }
  }

  void write(const std::vector<TaskGroup>& groups, int epoch) {
    for (const auto& g : groups)
      for (std::size_t i = 0; i < g.trials.size(); ++i)
        write(g.trials[i], trial_id(epoch, g.task_index, static_cast<int>(i)));
  }

 private:
  std::ostream& out_;
};

inline json to_json(const ExperienceRecord& r) {
  json j{{"trial_id", r.trial_id}, {"episode", r.episode}, {"step", r.step}, {"kind", to_string(r.kind)}};
  if (const auto* s = std::get_if<std::string>(&r.context))
    j["context"] = *s;
  else
    j["context"] = std::get<std::vector<double>>(r.context);
  j["action"] = r.action;
  j["advantage"] = r.advantage;
  j["G"] = r.G;
  return j;
}

class JsonlExperienceSink final : public ExperienceSink {
 public:
  explicit JsonlExperienceSink(std::ostream& out, bool header = true) : out_(out) {
    if (header)
      out_ << json{{"schema", "metatrial.experience"}, {"version", kExperienceSchemaVersion}}.dump() << '\n';
  }
  void write(const ExperienceRecord& record) override {
    out_ << to_json(record).dump() << '\n';
    if (!out_) throw std::runtime_error("write failed");
  }

 private:
  std::ostream& out_;
};

inline void write_metrics_header(std::ostream& out) {
  out << "epoch,mean_objective,success_rate,mean_episodes,grad_norm,episodes\n";
}

inline void write_metrics_row(std::ostream& out, const EpochMetrics& m) {
  out << m.epoch << ',' << format_double(m.mean_objective) << ',' << format_double(m.success_rate) << ','
      << format_double(m.mean_episodes) << ',' << format_double(m.grad_norm) << ',' << m.episodes << '\n';
}

// One row per task per k.
inline void write_passk_csv(std::ostream& out, const PassAtKReport& r, const std::string& prefix_header = "",
                            const std::string& prefix = "", bool header = true) {
  if (header) out << prefix_header << "task,seed,protocol,k,solved,episodes\n";
  for (std::size_t i = 0; i < r.tasks.size(); ++i)
    for (int k : r.k_values) {
      const auto& t = r.tasks[i];
      out << prefix << i << ',' << t.seed << ',' << to_string(r.protocol) << ',' << k << ','
          << (t.first_success >= 1 && t.first_success <= k) << ',' << t.episodes << '\n';
    }
}

inline json to_json(const PassAtKReport& r) {
  json rates = json::object();
  for (std::size_t i = 0; i < r.k_values.size(); ++i) rates["pass@" + std::to_string(r.k_values[i])] = r.rates[i];
  return {{"protocol", to_string(r.protocol)}, {"memory_mode", to_string(r.memory_mode)},
          {"seed", r.seed},                    {"temperature", r.temperature},
          {"task_count", r.task_count()},      {"k_values", r.k_values},
          {"rates", rates}};
}

inline void write_diversity_csv(std::ostream& out, const DiversityReport& r, std::span<const TaskInstance> tasks) {
  out << "task,seed,samples,distinct,entropy\n";
  for (std::size_t i = 0; i < r.entropy.size(); ++i)
    out << i << ',' << tasks[i].seed << ',' << r.samples << ',' << r.distinct[i] << ',' << format_double(r.entropy[i])
        << '\n';
}

inline json to_json(const DiversityReport& r) {
  return {{"samples", r.samples}, {"task_count", r.entropy.size()}, {"mean_entropy", r.mean_entropy}};
}

inline void write_sweep_csv(std::ostream& out, const SweepReport& r) {
  for (std::size_t v = 0; v < r.rows.size(); ++v)
    write_passk_csv(out, r.rows[v], "difficulty,", std::to_string(r.axis[v]) + ",", v == 0);
}

inline json to_json(const SweepReport& r) {
  json rows = json::array();
  for (std::size_t v = 0; v < r.rows.size(); ++v) {
    json row = to_json(r.rows[v]);
    row["difficulty"] = r.axis[v];
    rows.push_back(row);
  }
  TaskInstance shape = r.shape;
  return {{"axis", r.axis}, {"tasks_per_value", r.tasks_per_value}, {"shape", to_json(shape)}, {"rows", rows}};
}

inline void write_json_file(const std::filesystem::path& path, const json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

}  // namespace metatrial
