#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "metatrial/core/error.hpp"
#include "metatrial/core/rng.hpp"
#include "metatrial/env/types.hpp"

namespace metatrial {

struct MinesweeperState {
  int size = 0;
  int n_mines = 0;
  int max_steps = 0;
  // Seeded placement order; mines are the first n_mines entries that differ
  // from the first revealed cell.
  std::vector<int> placement_order;
  std::vector<std::uint8_t> mine;
  std::vector<std::uint8_t> adjacent;  // mine count in the 8-neighborhood
  std::vector<std::uint8_t> revealed;
  std::optional<int> exploded;
  bool first_click_done = false;
  int steps_taken = 0;
  int revealed_count = 0;
  bool done = false;
  bool success = false;

  int cell_count() const { return size * size; }
  std::vector<int> mine_cells() const {
    std::vector<int> out;
    for (int c = 0; c < cell_count(); ++c)
      if (mine[c]) out.push_back(c);
    return out;
  }
  friend bool operator==(const MinesweeperState&, const MinesweeperState&) = default;
};

namespace detail {

template <class Fn>
void for_each_neighbor(int size, int cell, Fn&& fn) {
  const int r = cell / size, c = cell % size;
  for (int dr = -1; dr <= 1; ++dr)
    for (int dc = -1; dc <= 1; ++dc) {
      if (dr == 0 && dc == 0) continue;
      const int nr = r + dr, nc = c + dc;
      if (nr >= 0 && nr < size && nc >= 0 && nc < size) fn(nr * size + nc);
    }
}

inline void place_mines(MinesweeperState& s, std::span<const int> mines) {
  std::fill(s.mine.begin(), s.mine.end(), 0);
  std::fill(s.adjacent.begin(), s.adjacent.end(), 0);
  for (int m : mines) s.mine[m] = 1;
  for (int m : mines) for_each_neighbor(s.size, m, [&](int n) { ++s.adjacent[n]; });
  s.first_click_done = true;
}

}  // namespace detail

inline MinesweeperState generate_minesweeper(const TaskInstance& task) {
  validate_task(task);
  MinesweeperState s;
  s.size = task.board_size;
  s.n_mines = task.difficulty;
  s.max_steps = task.max_steps;
  const int n = s.cell_count();
  s.mine.assign(n, 0);
  s.adjacent.assign(n, 0);
  s.revealed.assign(n, 0);
  s.placement_order.resize(n);
  for (int i = 0; i < n; ++i) s.placement_order[i] = i;
  Rng rng(derive_seed(task.seed, {0x4D494E45ULL}));
  for (int i = n - 1; i > 0; --i)
    std::swap(s.placement_order[i], s.placement_order[rng.below(static_cast<std::uint64_t>(i) + 1)]);
  return s;
}

// A board with mines fixed up front (no first-click guarantee). Used by
// exhaustive checks that enumerate every placement.
inline MinesweeperState minesweeper_from_layout(int size, std::span<const int> mines, int max_steps) {
  MinesweeperState s;
  s.size = size;
  s.n_mines = static_cast<int>(mines.size());
  s.max_steps = max_steps;
  s.mine.assign(size * size, 0);
  s.adjacent.assign(size * size, 0);
  s.revealed.assign(size * size, 0);
  detail::place_mines(s, mines);
  return s;
}

/// Reveals one unopened cell. A zero-count cell floods its connected zero
/// region plus that region's numbered border.
inline StepOutcome reveal(MinesweeperState& s, int cell) {
  if (s.done) throw ProtocolError("episode already finished");
  if (cell < 0 || cell >= s.cell_count() || s.revealed[cell])
    throw ProtocolError("cell is not an unopened cell");

  if (!s.first_click_done) {
    std::vector<int> mines;
    for (int c : s.placement_order) {
      if (static_cast<int>(mines.size()) == s.n_mines) break;
      if (c != cell) mines.push_back(c);
    }
    detail::place_mines(s, mines);
  }
  ++s.steps_taken;

  StepOutcome out;
  if (s.mine[cell]) {
    s.exploded = cell;
    s.done = true;
    out.done = true;
    return out;
  }

  std::vector<int> stack{cell};
  s.revealed[cell] = 1;
  ++s.revealed_count;
  while (!stack.empty()) {
    const int c = stack.back();
    stack.pop_back();
    if (s.adjacent[c] != 0) continue;
    detail::for_each_neighbor(s.size, c, [&](int nb) {
      if (s.revealed[nb] || s.mine[nb]) return;
      s.revealed[nb] = 1;
      ++s.revealed_count;
      stack.push_back(nb);
    });
  }

  if (s.revealed_count == s.cell_count() - s.n_mines) {
    s.success = true;
    s.done = true;
    out = {kSuccessReward, true, true};
    return out;
  }
  if (s.steps_taken >= s.max_steps) {
    s.done = true;
    out.done = true;
  }
  return out;
}

inline std::string minesweeper_cells(const MinesweeperState& s) {
  std::string out(static_cast<std::size_t>(s.cell_count()), '?');
  for (int c = 0; c < s.cell_count(); ++c) {
    if (s.exploded == c)
      out[c] = '*';
    else if (s.revealed[c])
      out[c] = s.adjacent[c] == 0 ? '.' : static_cast<char>('0' + s.adjacent[c]);
  }
  return out;
}

inline std::vector<Action> minesweeper_admissible(const MinesweeperState& s) {
  std::vector<Action> out;
  if (s.done) return out;
  for (int c = 0; c < s.cell_count(); ++c)
    if (!s.revealed[c]) out.push_back({c});
  return out;
}

}  // namespace metatrial
