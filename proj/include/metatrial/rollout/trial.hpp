#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "metatrial/env/types.hpp"
#include "metatrial/policy/memory.hpp"

namespace metatrial {

struct Step {
  Observation observation;      // state the action was chosen in
  std::optional<Action> action; // empty for a failed step (no usable action)
  double reward = 0.0;
  int index = 0;
  std::string prompt;           // text backends only
};

struct Episode {
  std::vector<Step> steps;
  bool success = false;
  int episode_index = 0;
  MemoryState memory_used;  // snapshot at episode start
  EpisodeEvidence evidence;
  Observation final_observation;

  std::vector<Action> actions() const {
    std::vector<Action> out;
    for (const auto& s : steps)
      if (s.action) out.push_back(*s.action);
    return out;
  }
  std::vector<double> rewards() const {
    std::vector<double> out;
    out.reserve(steps.size());
    for (const auto& s : steps) out.push_back(s.reward);
    return out;
  }
};

struct Trial {
  TaskInstance task;
  std::vector<Episode> episodes;
  // reflections[n] is the reflection written after episode n, if any.
  std::vector<std::optional<Reflection>> reflections;
  int budget = 1;
  std::uint64_t rng_stream = 0;

  bool success() const { return !episodes.empty() && episodes.back().success; }
  // 1-based index of the successful episode, 0 when the trial failed.
  int first_success() const { return success() ? static_cast<int>(episodes.size()) : 0; }
  std::vector<std::vector<double>> rewards() const {
    std::vector<std::vector<double>> out;
    for (const auto& e : episodes) out.push_back(e.rewards());
    return out;
  }
  std::size_t reflection_count() const {
    std::size_t n = 0;
    for (const auto& r : reflections) n += r.has_value();
    return n;
  }
};

}  // namespace metatrial
