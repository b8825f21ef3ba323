#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "metatrial/env/types.hpp"

namespace metatrial {

// What the inter-episode memory keeps. None injects an empty memory into
// every episode.
enum class MemoryMode { None, TrajectoryOnly, ReflectionOnly, Both };

inline std::string_view to_string(MemoryMode m) {
  switch (m) {
    case MemoryMode::None: return "none";
    case MemoryMode::TrajectoryOnly: return "trajectory";
    case MemoryMode::ReflectionOnly: return "reflection";
    case MemoryMode::Both: return "both";
  }
  return "both";
}

inline MemoryMode parse_memory_mode(std::string_view s) {
  if (s == "none") return MemoryMode::None;
  if (s == "trajectory") return MemoryMode::TrajectoryOnly;
  if (s == "reflection") return MemoryMode::ReflectionOnly;
  if (s == "both") return MemoryMode::Both;
  throw std::invalid_argument("unknown memory mode '" + std::string(s) + "'");
}

struct EpisodeSummary {
  int episode = 0;
  bool success = false;
  // Raw trajectory content; left empty under ReflectionOnly.
  std::vector<Action> actions;
  std::vector<int> visited;  // MineSweeper: cells known safe after the episode
  std::optional<int> exploded;
  std::vector<int> final_boxes;

  friend bool operator==(const EpisodeSummary&, const EpisodeSummary&) = default;
};

struct Reflection {
  int episode = 0;
  // Structured failure evidence (parametric backend).
  std::vector<int> known_mines;
  std::vector<int> stuck_boxes;
  // Free text (LLM backend) or a rendering of the structured record.
  std::string text;
  // Prompt that produced `text`, when a text backend wrote it.
  std::string prompt;

  friend bool operator==(const Reflection&, const Reflection&) = default;
};

struct MemoryState {
  MemoryMode mode = MemoryMode::Both;
  std::vector<EpisodeSummary> episode_summaries;
  std::vector<Reflection> reflections;

  bool empty() const { return episode_summaries.empty() && reflections.empty(); }
  friend bool operator==(const MemoryState&, const MemoryState&) = default;
};

}  // namespace metatrial
