#pragma once

#include <cstddef>
#include <exception>
#include <string>
#include <variant>
#include <vector>

#include "metatrial/core/error.hpp"
#include "metatrial/policy/features.hpp"
#include "metatrial/trainer/trainer.hpp"

namespace metatrial {

enum class RecordKind { Action, Reflection };

inline std::string_view to_string(RecordKind k) { return k == RecordKind::Action ? "action" : "reflection"; }

/// One trainable decision with its credit. `context` is the prompt for text
/// backends and the chosen action's feature vector for the parametric one.
struct ExperienceRecord {
  std::string trial_id;
  int episode = 0;
  int step = 0;
  RecordKind kind = RecordKind::Action;
  std::variant<std::string, std::vector<double>> context;
  std::string action;
  double advantage = 0.0;
  double G = 0.0;

  friend bool operator==(const ExperienceRecord&, const ExperienceRecord&) = default;
};

class ExperienceSink {
 public:
  virtual ~ExperienceSink() = default;
  virtual void write(const ExperienceRecord& record) = 0;
};

class VectorSink final : public ExperienceSink {
 public:
  void write(const ExperienceRecord& record) override { records.push_back(record); }
  std::vector<ExperienceRecord> records;
};

inline std::string trial_id(int epoch, int task_index, int trial) {
  return std::to_string(epoch) + "-" + std::to_string(task_index) + "-" + std::to_string(trial);
}

/// Writes one record per action step and one per text-backend reflection.
/// A reflection after episode n is credited with gamma_traj * G_0^(n+1).
/// Returns the number of records written; a failing sink raises SinkError
/// carrying the count that made it out.
inline std::size_t export_experience(const std::vector<TaskGroup>& groups, ExperienceSink& sink, double gamma_traj,
                                     int epoch = 0) {
  std::size_t written = 0;
  auto emit = [&](const ExperienceRecord& r) {
    try {
      sink.write(r);
    } catch (const std::exception& e) {
      throw SinkError(std::string("experience sink failed: ") + e.what(), written);
    }
    ++written;
  };
  for (const auto& g : groups) {
    const int n_board = g.task.board_size;
    for (std::size_t i = 0; i < g.trials.size(); ++i) {
      const Trial& trial = g.trials[i];
      const ReturnTable& ret = g.returns[i];
      const TrialAdvantages& adv = g.advantages.trials[i];
      const std::string id = trial_id(epoch, g.task_index, static_cast<int>(i));
      for (std::size_t n = 0; n < trial.episodes.size(); ++n) {
        const Episode& ep = trial.episodes[n];
        for (std::size_t t = 0; t < ep.steps.size(); ++t) {
          const Step& s = ep.steps[t];
          if (!s.action) continue;
          ExperienceRecord r{id, static_cast<int>(n), static_cast<int>(t), RecordKind::Action, {}, {},
                             adv.steps[n][t], ret.G[n][t]};
          if (s.prompt.empty())
            r.context = encode_features(s.observation, *s.action, ep.memory_used);
          else
            r.context = s.prompt;
          r.action = action_to_string(g.task.env_kind, n_board, *s.action);
          emit(r);
        }
        if (n < trial.reflections.size() && trial.reflections[n] && !trial.reflections[n]->prompt.empty()) {
          const Reflection& refl = *trial.reflections[n];
          emit({id, static_cast<int>(n), static_cast<int>(ep.steps.size()), RecordKind::Reflection, refl.prompt,
                refl.text, adv.reflections[n], ret.reflection_return(n, gamma_traj)});
        }
      }
    }
  }
  return written;
}

}  // namespace metatrial
