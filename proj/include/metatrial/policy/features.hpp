#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdlib>
#include <span>
#include <vector>

#include "metatrial/core/error.hpp"
#include "metatrial/env/minesweeper.hpp"
#include "metatrial/env/types.hpp"
#include "metatrial/policy/memory.hpp"

namespace metatrial {

// Feature layout, MineSweeper (one row per candidate cell):
//   0  row, scaled to [-1, 1]
//   1  column, scaled to [-1, 1]
//   2  opened neighbors / 8
//   3  lowest clue density among opened neighbors (clue / unopened cells around it)
//   4  highest clue density among opened neighbors
//   5  known mine: a prior episode exploded here                  [reflection]
//   6  known safe: the cell was open at the end of a prior episode [trajectory]
//   7  drop in the highest clue density once known mines are
//      subtracted from the neighboring clues                       [reflection]
//
// Feature layout, Sokoban (one row per direction):
//   0  row delta            1  column delta
//   2  walks into a wall    3  pushes a box
//   4  push is blocked      5  push lands a box on a target
//   6  push takes a box off a target
//   7  push lands a box in a dead corner off target
//   8  player gets closer to the nearest off-target box (scaled)
//   9  total box-to-target distance decreases (scaled)
//   10 share of prior-episode moves in this direction              [trajectory]
//   11 push lands a box where a prior episode ended stuck           [reflection]
//
// Entries marked [trajectory] are zero under ReflectionOnly and None;
// entries marked [reflection] are zero under TrajectoryOnly and None.
inline constexpr int kMinesweeperFeatures = 8;
inline constexpr int kSokobanFeatures = 12;

namespace feature {
inline constexpr int kMsKnownMine = 5;
inline constexpr int kMsKnownSafe = 6;
inline constexpr int kMsMemoryDeduction = 7;
inline constexpr int kSkActionShare = 10;
inline constexpr int kSkStuckRepeat = 11;
}  // namespace feature

constexpr int feature_dim(EnvKind kind) {
  return kind == EnvKind::Sokoban ? kSokobanFeatures : kMinesweeperFeatures;
}

// Row-major K x F matrix, one row per admissible action.
struct FeatureMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;

  std::span<const double> row(int i) const {
    return {values.data() + static_cast<std::size_t>(i) * cols, static_cast<std::size_t>(cols)};
  }
};

namespace detail {

inline bool uses_trajectory(MemoryMode m) {
  return m == MemoryMode::TrajectoryOnly || m == MemoryMode::Both;
}
inline bool uses_reflection(MemoryMode m) {
  return m == MemoryMode::ReflectionOnly || m == MemoryMode::Both;
}

inline double scaled_coordinate(int v, int n) { return n <= 1 ? 0.0 : 2.0 * v / (n - 1) - 1.0; }

inline bool is_clue(char c) { return c >= '1' && c <= '8'; }

inline void minesweeper_rows(const Observation& obs, const MemoryState& memory, FeatureMatrix& out) {
  const int n = obs.board_size;
  const int cells = n * n;
  std::vector<std::uint8_t> known_mine(cells, 0), known_safe(cells, 0);
  if (uses_reflection(memory.mode))
    for (const auto& r : memory.reflections)
      for (int c : r.known_mines) known_mine[c] = 1;
  if (uses_trajectory(memory.mode))
    for (const auto& s : memory.episode_summaries)
      for (int c : s.visited) known_safe[c] = 1;

  // Per clue cell: unopened neighbors, and how many of them are known mines.
  std::vector<int> hidden(cells, 0), hidden_mines(cells, 0);
  for (int c = 0; c < cells; ++c) {
    if (!is_clue(obs.cells[c])) continue;
    for_each_neighbor(n, c, [&](int nb) {
      if (obs.cells[nb] == '?') {
        ++hidden[c];
        hidden_mines[c] += known_mine[nb];
      }
    });
  }

  for (int i = 0; i < out.rows; ++i) {
    const int cell = obs.admissible_actions[i].id;
    double* f = out.values.data() + static_cast<std::size_t>(i) * out.cols;
    f[0] = scaled_coordinate(cell / n, n);
    f[1] = scaled_coordinate(cell % n, n);
    int opened = 0;
    double lo = 1.0, hi = 0.0, hi_residual = 0.0;
    bool any_clue = false;
    for_each_neighbor(n, cell, [&](int nb) {
      const char sym = obs.cells[nb];
      if (sym == '?') return;
      ++opened;
      if (!is_clue(sym)) return;
      any_clue = true;
      const int clue = sym - '0';
      const double density = std::min(1.0, static_cast<double>(clue) / hidden[nb]);
      lo = std::min(lo, density);
      hi = std::max(hi, density);
      const int free = hidden[nb] - hidden_mines[nb];
      const double residual =
          free > 0 ? std::clamp(static_cast<double>(clue - hidden_mines[nb]) / free, 0.0, 1.0) : 0.0;
      hi_residual = std::max(hi_residual, residual);
    });
    f[2] = opened / 8.0;
    f[3] = any_clue ? lo : 0.0;
    f[4] = any_clue ? hi : 0.0;
    f[5] = known_mine[cell];
    f[6] = known_safe[cell];
    f[7] = (any_clue && !known_mine[cell]) ? std::max(0.0, hi - hi_residual) : 0.0;
  }
}

inline int manhattan(int n, int a, int b) {
  return std::abs(a / n - b / n) + std::abs(a % n - b % n);
}

inline void sokoban_rows(const Observation& obs, const MemoryState& memory, FeatureMatrix& out) {
  const int n = obs.board_size;
  const int cells = n * n;
  std::vector<int> boxes, targets;
  int player = 0;
  for (int c = 0; c < cells; ++c) {
    const char s = obs.cells[c];
    if (s == 'X' || s == 'V') boxes.push_back(c);
    if (s == 'O' || s == 'V' || s == 'S') targets.push_back(c);
    if (s == 'P' || s == 'S') player = c;
  }
  auto wall = [&](int c) { return obs.cells[c] == '#'; };
  auto box = [&](int c) { return obs.cells[c] == 'X' || obs.cells[c] == 'V'; };
  auto target = [&](int c) { return obs.cells[c] == 'O' || obs.cells[c] == 'V' || obs.cells[c] == 'S'; };
  auto corner = [&](int c) {
    const bool v = wall(c - n) || wall(c + n);
    const bool h = wall(c - 1) || wall(c + 1);
    return v && h;
  };
  auto nearest_off_target_box = [&](int from, const std::vector<int>& bs) {
    int best = -1;
    for (int b : bs) {
      if (std::binary_search(targets.begin(), targets.end(), b)) continue;
      const int d = manhattan(n, from, b);
      if (best < 0 || d < best) best = d;
    }
    return best;
  };
  auto box_target_cost = [&](const std::vector<int>& bs) {
    int total = 0;
    for (int b : bs) {
      int best = 4 * n;
      for (int t : targets) best = std::min(best, manhattan(n, b, t));
      total += best;
    }
    return total;
  };

  std::array<double, 4> share{};
  if (uses_trajectory(memory.mode)) {
    int total = 0;
    for (const auto& s : memory.episode_summaries)
      for (Action a : s.actions) {
        if (a.id >= 0 && a.id < 4) share[a.id] += 1.0;
        ++total;
      }
    if (total > 0)
      for (double& v : share) v /= total;
  }
  std::vector<std::uint8_t> stuck(cells, 0);
  if (uses_reflection(memory.mode))
    for (const auto& r : memory.reflections)
      for (int c : r.stuck_boxes) stuck[c] = 1;

  const int base_near = nearest_off_target_box(player, boxes);
  const int base_cost = box_target_cost(boxes);
  for (int i = 0; i < out.rows; ++i) {
    const int d = obs.admissible_actions[i].id;
    double* f = out.values.data() + static_cast<std::size_t>(i) * out.cols;
    f[0] = kRowDelta[d];
    f[1] = kColDelta[d];
    const int dest = player + kRowDelta[d] * n + kColDelta[d];
    const int beyond = dest + kRowDelta[d] * n + kColDelta[d];
    int new_player = player;
    std::vector<int> new_boxes = boxes;
    if (wall(dest)) {
      f[2] = 1.0;
    } else if (box(dest)) {
      if (wall(beyond) || box(beyond)) {
        f[4] = 1.0;
      } else {
        f[3] = 1.0;
        f[5] = target(beyond) ? 1.0 : 0.0;
        f[6] = target(dest) ? 1.0 : 0.0;
        f[7] = (!target(beyond) && corner(beyond)) ? 1.0 : 0.0;
        f[11] = stuck[beyond];
        *std::find(new_boxes.begin(), new_boxes.end(), dest) = beyond;
        std::sort(new_boxes.begin(), new_boxes.end());
        new_player = dest;
      }
    } else {
      new_player = dest;
    }
    const int near = nearest_off_target_box(new_player, new_boxes);
    if (base_near >= 0 && near >= 0)
      f[8] = std::clamp((base_near - near) / (2.0 * n), -1.0, 1.0);
    f[9] = std::clamp((base_cost - box_target_cost(new_boxes)) / static_cast<double>(n), -1.0, 1.0);
    f[10] = share[d];
  }
}

}  // namespace detail

/// Features of every admissible action of `obs`, conditioned on `memory`.
inline FeatureMatrix encode_all(const Observation& obs, const MemoryState& memory) {
  FeatureMatrix m;
  m.rows = static_cast<int>(obs.admissible_actions.size());
  m.cols = feature_dim(obs.kind);
  m.values.assign(static_cast<std::size_t>(m.rows) * m.cols, 0.0);
  if (m.rows == 0) return m;
  if (obs.kind == EnvKind::Sokoban)
    detail::sokoban_rows(obs, memory, m);
  else
    detail::minesweeper_rows(obs, memory, m);
  return m;
}

inline std::vector<double> encode_features(const Observation& obs, Action candidate, const MemoryState& memory) {
  const auto m = encode_all(obs, memory);
  for (int i = 0; i < m.rows; ++i)
    if (obs.admissible_actions[i] == candidate) return {m.row(i).begin(), m.row(i).end()};
  throw ProtocolError("candidate action is not admissible");
}

}  // namespace metatrial
