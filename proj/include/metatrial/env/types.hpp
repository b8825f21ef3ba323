#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace metatrial {

enum class EnvKind { Sokoban, MineSweeper };

inline std::string_view to_string(EnvKind kind) {
  return kind == EnvKind::Sokoban ? "sokoban" : "minesweeper";
}

inline EnvKind parse_env_kind(std::string_view s) {
  if (s == "sokoban") return EnvKind::Sokoban;
  if (s == "minesweeper") return EnvKind::MineSweeper;
  throw std::invalid_argument("unknown environment '" + std::string(s) + "'");
}

// Episode horizon when the task does not set one.
constexpr int default_max_steps(EnvKind kind, int board_size) {
  return kind == EnvKind::Sokoban ? 30 : board_size * board_size;
}

/// One seeded task. Identical values regenerate bit-identical initial states.
struct TaskInstance {
  EnvKind env_kind = EnvKind::MineSweeper;
  int board_size = 6;
  int difficulty = 3;  // boxes for Sokoban, mines for MineSweeper
  std::uint64_t seed = 0;
  int max_steps = 36;
  int interior_walls = 0;  // Sokoban generator option

  friend bool operator==(const TaskInstance&, const TaskInstance&) = default;
};

inline TaskInstance make_task(EnvKind kind, int board_size, int difficulty, std::uint64_t seed) {
  return {kind, board_size, difficulty, seed, default_max_steps(kind, board_size), 0};
}

// Throws std::invalid_argument when the task cannot be generated.
inline void validate_task(const TaskInstance& task) {
  if (task.board_size < 2) throw std::invalid_argument("board_size must be at least 2");
  if (task.difficulty < 1) throw std::invalid_argument("difficulty must be positive");
  if (task.max_steps < 1) throw std::invalid_argument("max_steps must be positive");
  const int cells = task.board_size * task.board_size;
  if (task.difficulty >= cells) throw std::invalid_argument("difficulty exceeds board capacity");
  if (task.env_kind == EnvKind::Sokoban) {
    // A push needs three interior cells in a row.
    if (task.board_size < 5) throw std::invalid_argument("sokoban board_size must be at least 5");
    const int interior = (task.board_size - 2) * (task.board_size - 2);
    // Boxes, targets (may coincide) and the player need room inside the border.
    if (task.difficulty + 1 + task.interior_walls > interior)
      throw std::invalid_argument("difficulty exceeds board capacity");
  }
}

struct Cell {
  int row = 0;
  int col = 0;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Sokoban actions are directions 0..3 (up, down, left, right); MineSweeper
/// actions are row-major cell indices.
struct Action {
  int id = 0;
  friend auto operator<=>(const Action&, const Action&) = default;
};

enum Direction : int { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };

inline constexpr int kRowDelta[4] = {-1, 1, 0, 0};
inline constexpr int kColDelta[4] = {0, 0, -1, 1};
inline constexpr std::string_view kDirectionNames[4] = {"up", "down", "left", "right"};

constexpr Direction opposite(Direction d) {
  return static_cast<Direction>(d ^ 1);
}

inline std::string action_to_string(EnvKind kind, int board_size, Action a) {
  if (kind == EnvKind::Sokoban) return std::string(kDirectionNames[a.id]);
  return "(" + std::to_string(a.id / board_size + 1) + ", " + std::to_string(a.id % board_size + 1) + ")";
}

struct StepOutcome {
  double reward = 0.0;
  bool done = false;
  bool success = false;
};

inline constexpr double kSuccessReward = 10.0;

/// What the agent sees. `cells` holds one internal symbol per board cell,
/// row-major: Sokoban uses # _ O X P S and V for a box on a target;
/// MineSweeper uses ? . 1-8 and * for the exploded mine.
struct Observation {
  EnvKind kind = EnvKind::MineSweeper;
  int board_size = 0;
  std::string cells;
  std::vector<Action> admissible_actions;

  char at(int row, int col) const { return cells[static_cast<std::size_t>(row * board_size + col)]; }
  bool admissible(Action a) const {
    for (Action b : admissible_actions)
      if (b == a) return true;
    return false;
  }
  std::string text() const;

  friend bool operator==(const Observation&, const Observation&) = default;
};

/// Facts about a finished episode that memory summaries are built from.
struct EpisodeEvidence {
  std::vector<int> revealed;              // MineSweeper: cells open at episode end
  std::optional<int> exploded;            // MineSweeper: the mine that ended the episode
  std::vector<int> final_boxes;           // Sokoban: box layout at episode end
  std::vector<int> stuck_boxes;           // Sokoban: off-target boxes in a dead corner
};

}  // namespace metatrial
