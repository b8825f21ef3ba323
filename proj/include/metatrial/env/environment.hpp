#pragma once

#include <concepts>
#include <utility>
#include <variant>

#include "metatrial/core/error.hpp"
#include "metatrial/env/minesweeper.hpp"
#include "metatrial/env/render.hpp"
#include "metatrial/env/sokoban.hpp"
#include "metatrial/env/types.hpp"

namespace metatrial {

/// Anything the rollout engine can drive. States are plain values; the
/// environment object itself is immutable after construction.
template <class E>
concept Environment = requires(const E& env, typename E::State& state, Action action) {
  { env.task() } -> std::convertible_to<const TaskInstance&>;
  { env.reset() } -> std::same_as<typename E::State>;
  { env.observe(std::as_const(state)) } -> std::same_as<Observation>;
  { env.step(state, action) } -> std::same_as<StepOutcome>;
  { env.evidence(std::as_const(state)) } -> std::same_as<EpisodeEvidence>;
};

/// Sokoban or MineSweeper selected by TaskInstance::env_kind.
class GridEnvironment {
 public:
  using State = std::variant<SokobanState, MinesweeperState>;

  explicit GridEnvironment(const TaskInstance& task) : task_(task) {
    if (task.env_kind == EnvKind::Sokoban) {
      auto puzzle = generate_sokoban(task);
      initial_ = std::move(puzzle.state);
      solution_ = std::move(puzzle.solution);
    } else {
      initial_ = generate_minesweeper(task);
    }
  }

  const TaskInstance& task() const { return task_; }
  State reset() const { return initial_; }
  const std::vector<Direction>& sokoban_solution() const { return solution_; }

  Observation observe(const State& state) const {
    Observation obs;
    obs.kind = task_.env_kind;
    obs.board_size = task_.board_size;
    if (const auto* s = std::get_if<SokobanState>(&state)) {
      obs.cells = sokoban_cells(*s);
      if (!s->done) obs.admissible_actions = {{kUp}, {kDown}, {kLeft}, {kRight}};
    } else {
      const auto& m = std::get<MinesweeperState>(state);
      obs.cells = minesweeper_cells(m);
      obs.admissible_actions = minesweeper_admissible(m);
    }
    return obs;
  }

  StepOutcome step(State& state, Action action) const {
    if (auto* s = std::get_if<SokobanState>(&state)) {
      if (action.id < 0 || action.id > 3) throw ProtocolError("inadmissible Sokoban action");
      return step_sokoban(*s, static_cast<Direction>(action.id));
    }
    return reveal(std::get<MinesweeperState>(state), action.id);
  }

  EpisodeEvidence evidence(const State& state) const {
    EpisodeEvidence ev;
    if (const auto* s = std::get_if<SokobanState>(&state)) {
      ev.final_boxes = s->boxes;
      ev.stuck_boxes = sokoban_stuck_boxes(*s);
    } else {
      const auto& m = std::get<MinesweeperState>(state);
      for (int c = 0; c < m.cell_count(); ++c)
        if (m.revealed[c]) ev.revealed.push_back(c);
      ev.exploded = m.exploded;
    }
    return ev;
  }

 private:
  TaskInstance task_;
  State initial_;
  std::vector<Direction> solution_;
};

static_assert(Environment<GridEnvironment>);

}  // namespace metatrial
