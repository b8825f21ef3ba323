#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include "metatrial/credit/advantages.hpp"
#include "metatrial/credit/returns.hpp"
#include "metatrial/policy/memory.hpp"

namespace metatrial {

enum class TrainMode { RL, MetaRL };

inline std::string_view to_string(TrainMode m) { return m == TrainMode::RL ? "rl" : "meta"; }

inline TrainMode parse_train_mode(std::string_view s) {
  if (s == "rl") return TrainMode::RL;
  if (s == "meta") return TrainMode::MetaRL;
  throw std::invalid_argument("unknown training mode '" + std::string(s) + "'");
}

struct TrainConfig {
  TrainMode mode = TrainMode::MetaRL;
  int group_size = 8;
  int episodes_per_trial = 3;  // N; RL mode always runs 1
  DiscountConfig discount;
  Estimator estimator = Estimator::GroupNorm;
  double learning_rate = 0.05;
  double grad_clip = 10.0;  // max gradient L2 norm, 0 disables
  double momentum = 0.0;
  int batch_tasks = 16;
  int epochs = 300;
  double rollout_temperature = 1.0;
  MemoryMode memory_mode = MemoryMode::Both;
  unsigned threads = 0;  // 0: hardware concurrency

  int episode_budget() const { return mode == TrainMode::RL ? 1 : episodes_per_trial; }

  void validate() const {
    discount.validate();
    auto positive = [](bool ok, const char* field) {
      if (!ok) throw std::invalid_argument(std::string(field) + " must be positive");
    };
    positive(group_size >= 1, "group_size");
    positive(episodes_per_trial >= 1, "episodes_per_trial");
    positive(learning_rate > 0.0, "learning_rate");
    positive(batch_tasks >= 1, "batch_tasks");
    positive(epochs >= 1, "epochs");
    positive(rollout_temperature > 0.0, "rollout_temperature");
    if (grad_clip < 0.0) throw std::invalid_argument("grad_clip must be non-negative");
    if (momentum < 0.0 || momentum >= 1.0) throw std::invalid_argument("momentum must lie in [0, 1)");
    if (group_size < 2 && estimator != Estimator::MeanBaseline)
      throw std::invalid_argument("group_size must be at least 2 for " + std::string(to_string(estimator)));
  }

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// The RL configuration that consumes as many episodes per update as `meta`:
/// group size multiplied by N, one episode per trial, everything else equal.
inline std::pair<TrainConfig, TrainConfig> matched_budget_pair(const TrainConfig& meta) {
  if (meta.episodes_per_trial == 1) return {meta, meta};
  TrainConfig rl = meta;
  rl.mode = TrainMode::RL;
  rl.group_size = meta.group_size * meta.episodes_per_trial;
  rl.episodes_per_trial = 1;
  return {rl, meta};
}

}  // namespace metatrial
