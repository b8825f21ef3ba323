#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "metatrial/core/error.hpp"
#include "metatrial/core/rng.hpp"
#include "metatrial/env/types.hpp"
#include "metatrial/policy/linear_policy.hpp"
#include "metatrial/policy/memory.hpp"

namespace metatrial {

struct TurnContext {
  const TaskInstance& task;
  const Observation& initial;
  const Observation& current;
  std::span<const Action> history;  // actions already taken this episode
  const MemoryState& memory;
  int episode_index = 0;
  double temperature = 1.0;
};

// One policy decision. Text backends may return several Sokoban moves.
struct Turn {
  std::vector<Action> actions;
  std::string prompt;  // the rendered prompt, for text backends
};

struct ReflectContext {
  const TaskInstance& task;
  const Observation& initial;
  const Observation& final_observation;
  std::span<const Action> actions;
  const EpisodeEvidence& evidence;
  const MemoryState& memory;
  int episode_index = 0;
  double temperature = 1.0;
};

/// pi_theta(. | s, H). Implementations must be safe to call from several
/// trials at once.
class PolicyBackend {
 public:
  virtual ~PolicyBackend() = default;

  // Throws PolicyFailure, MalformedResponse or TransportError when no usable
  // action can be produced; the rollout engine records a failed step.
  virtual Turn act(const TurnContext& ctx, Rng& rng) const = 0;

  // Called after a failed episode that will be followed by another one.
  virtual Reflection reflect(const ReflectContext& ctx, Rng& rng) const = 0;
};

/// Deterministic failure summary: the exploded mine, or the boxes left stuck.
inline Reflection structured_reflection(const ReflectContext& ctx) {
  Reflection r;
  r.episode = ctx.episode_index;
  const int n = ctx.task.board_size;
  if (ctx.evidence.exploded) {
    r.known_mines.push_back(*ctx.evidence.exploded);
    r.text = "Revealing " + action_to_string(EnvKind::MineSweeper, n, Action{*ctx.evidence.exploded}) +
             " hit a mine; avoid it.";
  }
  r.stuck_boxes = ctx.evidence.stuck_boxes;
  if (!r.stuck_boxes.empty()) {
    r.text = "Boxes got stuck at";
    for (int c : r.stuck_boxes)
      r.text += " (" + std::to_string(c / n) + ", " + std::to_string(c % n) + ")";
    r.text += "; avoid pushing boxes there.";
  }
  if (r.text.empty()) r.text = "The attempt ran out of steps.";
  return r;
}

inline std::size_t sample_index(std::span<const double> probabilities, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    acc += probabilities[i];
    if (u < acc) return i;
  }
  return probabilities.size() - 1;
}

/// Linear-softmax policy over hand-built features. Parameters are shared
/// immutably; publish a new snapshot to change them.
class ParametricPolicy final : public PolicyBackend {
 public:
  explicit ParametricPolicy(std::shared_ptr<const PolicyParams> params) : params_(std::move(params)) {}

  const PolicyParams& params() const { return *params_; }

  Turn act(const TurnContext& ctx, Rng& rng) const override {
    const auto probs = action_distribution(*params_, ctx.current, ctx.memory, ctx.temperature).probabilities();
    if (probs.empty()) throw PolicyFailure("no admissible actions");
    return {{ctx.current.admissible_actions[sample_index(probs, rng)]}, {}};
  }

  Reflection reflect(const ReflectContext& ctx, Rng&) const override { return structured_reflection(ctx); }

 private:
  std::shared_ptr<const PolicyParams> params_;
};

}  // namespace metatrial
