#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "metatrial/core/error.hpp"
#include "metatrial/core/rng.hpp"
#include "metatrial/env/types.hpp"

namespace metatrial {

struct SokobanState {
  int size = 0;
  int max_steps = 0;
  std::vector<std::uint8_t> walls;
  std::vector<int> boxes;    // sorted cell indices
  std::vector<int> targets;  // sorted cell indices
  int player = 0;
  int steps_taken = 0;
  bool done = false;
  bool success = false;

  bool wall(int cell) const { return walls[cell] != 0; }
  bool box(int cell) const { return std::binary_search(boxes.begin(), boxes.end(), cell); }
  bool target(int cell) const { return std::binary_search(targets.begin(), targets.end(), cell); }
  bool solved() const { return boxes == targets; }

  friend bool operator==(const SokobanState&, const SokobanState&) = default;
};

struct SokobanPuzzle {
  SokobanState state;
  // Replaying these moves from `state` solves the puzzle.
  std::vector<Direction> solution;
};

namespace detail {

inline int shift(int size, int cell, Direction d) {
  return (cell / size + kRowDelta[d]) * size + cell % size + kColDelta[d];
}

inline bool interior_connected(int size, const std::vector<std::uint8_t>& walls) {
  int start = -1, open = 0;
  for (int c = 0; c < size * size; ++c)
    if (!walls[c]) {
      ++open;
      if (start < 0) start = c;
    }
  if (start < 0) return false;
  std::vector<std::uint8_t> seen(walls.size(), 0);
  std::vector<int> stack{start};
  seen[start] = 1;
  int reached = 0;
  while (!stack.empty()) {
    const int c = stack.back();
    stack.pop_back();
    ++reached;
    for (int d = 0; d < 4; ++d) {
      const int n = shift(size, c, static_cast<Direction>(d));
      if (!walls[n] && !seen[n]) {
        seen[n] = 1;
        stack.push_back(n);
      }
    }
  }
  return reached == open;
}

}  // namespace detail

// Dead corner: a wall on one vertical side and one horizontal side.
inline bool sokoban_corner(const SokobanState& s, int cell) {
  const bool vertical = s.wall(detail::shift(s.size, cell, kUp)) || s.wall(detail::shift(s.size, cell, kDown));
  const bool horizontal =
      s.wall(detail::shift(s.size, cell, kLeft)) || s.wall(detail::shift(s.size, cell, kRight));
  return vertical && horizontal;
}

/// Reverse-play generation: boxes start on their targets and the player
/// walks 2*board_size random steps, pulling any box directly behind it. The
/// recorded walk, reversed and mirrored, is a forward solution.
inline SokobanPuzzle generate_sokoban(const TaskInstance& task) {
  validate_task(task);
  const int n = task.board_size;
  const int pulls = 2 * n;
  Rng rng(derive_seed(task.seed, {0x534F4B4FULL}));

  for (int attempt = 0; attempt < 10000; ++attempt) {
    SokobanState s;
    s.size = n;
    s.max_steps = task.max_steps;
    s.walls.assign(n * n, 0);
    for (int c = 0; c < n * n; ++c) {
      const int r = c / n, col = c % n;
      if (r == 0 || col == 0 || r == n - 1 || col == n - 1) s.walls[c] = 1;
    }
    std::vector<int> interior;
    for (int c = 0; c < n * n; ++c)
      if (!s.walls[c]) interior.push_back(c);
    std::shuffle(interior.begin(), interior.end(), rng);

    int placed = 0;
    std::vector<int> open;
    for (int c : interior) {
      if (placed < task.interior_walls) {
        s.walls[c] = 1;
        if (detail::interior_connected(n, s.walls)) {
          ++placed;
          continue;
        }
        s.walls[c] = 0;
      }
      open.push_back(c);
    }
    if (static_cast<int>(open.size()) < task.difficulty + 1) continue;

    s.targets.assign(open.begin(), open.begin() + task.difficulty);
    std::sort(s.targets.begin(), s.targets.end());
    s.boxes = s.targets;
    s.player = open[task.difficulty];

    std::vector<Direction> walk;
    for (int i = 0; i < pulls; ++i) {
      Direction moves[4];
      int count = 0;
      for (int d = 0; d < 4; ++d) {
        const int dest = detail::shift(n, s.player, static_cast<Direction>(d));
        if (!s.wall(dest) && !s.box(dest)) moves[count++] = static_cast<Direction>(d);
      }
      if (count == 0) break;
      const Direction d = moves[rng.below(static_cast<std::uint64_t>(count))];
      const int behind = detail::shift(n, s.player, opposite(d));
      if (s.box(behind)) {
        *std::find(s.boxes.begin(), s.boxes.end(), behind) = s.player;
        std::sort(s.boxes.begin(), s.boxes.end());
      }
      s.player = detail::shift(n, s.player, d);
      walk.push_back(d);
    }
    if (s.solved()) continue;

    SokobanPuzzle puzzle{s, {}};
    for (auto it = walk.rbegin(); it != walk.rend(); ++it) puzzle.solution.push_back(opposite(*it));
    return puzzle;
  }
  throw std::invalid_argument("could not generate an unsolved Sokoban puzzle");
}

/// Moves the player one cell. Walking into a wall or a blocked box still
/// spends the step.
inline StepOutcome step_sokoban(SokobanState& s, Direction d) {
  if (s.done) throw ProtocolError("episode already finished");
  if (d < kUp || d > kRight) throw ProtocolError("unknown direction");
  ++s.steps_taken;
  const int dest = detail::shift(s.size, s.player, d);
  if (!s.wall(dest)) {
    if (s.box(dest)) {
      const int beyond = detail::shift(s.size, dest, d);
      if (!s.wall(beyond) && !s.box(beyond)) {
        *std::find(s.boxes.begin(), s.boxes.end(), dest) = beyond;
        std::sort(s.boxes.begin(), s.boxes.end());
        s.player = dest;
      }
    } else {
      s.player = dest;
    }
  }
  StepOutcome out;
  if (s.solved()) {
    s.success = s.done = true;
    out = {kSuccessReward, true, true};
  } else if (s.steps_taken >= s.max_steps) {
    s.done = out.done = true;
  }
  return out;
}

inline std::string sokoban_cells(const SokobanState& s) {
  std::string out(static_cast<std::size_t>(s.size * s.size), '_');
  for (int c = 0; c < s.size * s.size; ++c) {
    if (s.wall(c))
      out[c] = '#';
    else if (s.box(c))
      out[c] = s.target(c) ? 'V' : 'X';
    else if (c == s.player)
      out[c] = s.target(c) ? 'S' : 'P';
    else if (s.target(c))
      out[c] = 'O';
  }
  return out;
}

inline std::vector<int> sokoban_stuck_boxes(const SokobanState& s) {
  std::vector<int> out;
  for (int b : s.boxes)
    if (!s.target(b) && sokoban_corner(s, b)) out.push_back(b);
  return out;
}

}  // namespace metatrial
