#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>

#include "metatrial/core/error.hpp"
#include "metatrial/core/rng.hpp"
#include "metatrial/env/environment.hpp"
#include "metatrial/policy/backend.hpp"
#include "metatrial/policy/memory.hpp"
#include "metatrial/rollout/trial.hpp"

namespace metatrial {

/// Samples actions until the episode ends. A backend that cannot produce an
/// admissible action ends the episode as a failure with reward 0 at that step.
template <Environment Env>
Episode run_episode(const Env& env, const PolicyBackend& policy, const MemoryState& memory, int episode_index,
                    double temperature, Rng& rng) {
  Episode ep;
  ep.episode_index = episode_index;
  ep.memory_used = memory;
  auto state = env.reset();
  const Observation initial = env.observe(state);
  Observation obs = initial;
  std::vector<Action> history;
  const int horizon = env.task().max_steps;

  bool done = false;
  while (!done) {
    if (obs.admissible_actions.empty()) break;
    Turn turn;
    bool failed = false;
    try {
      turn = policy.act(TurnContext{env.task(), initial, obs, history, memory, episode_index, temperature}, rng);
      failed = turn.actions.empty();
    } catch (const PolicyFailure&) {
      failed = true;
    } catch (const MalformedResponse&) {
      failed = true;
    } catch (const TransportError&) {
      failed = true;
    }
    if (failed) {
      ep.steps.push_back({obs, std::nullopt, 0.0, static_cast<int>(ep.steps.size()), turn.prompt});
      break;
    }
    for (Action a : turn.actions) {
      if (!obs.admissible(a)) {
        ep.steps.push_back({obs, std::nullopt, 0.0, static_cast<int>(ep.steps.size()), turn.prompt});
        done = true;
        break;
      }
      const StepOutcome out = env.step(state, a);
      ep.steps.push_back({obs, a, out.reward, static_cast<int>(ep.steps.size()), turn.prompt});
      history.push_back(a);
      obs = env.observe(state);
      if (out.done || static_cast<int>(ep.steps.size()) >= horizon) {
        ep.success = out.success;
        done = true;
        break;
      }
    }
  }
  ep.evidence = env.evidence(state);
  ep.final_observation = std::move(obs);
  return ep;
}

inline EpisodeSummary summarize(const Episode& ep) {
  EpisodeSummary s;
  s.episode = ep.episode_index;
  s.success = ep.success;
  s.actions = ep.actions();
  s.visited = ep.evidence.revealed;
  s.exploded = ep.evidence.exploded;
  s.final_boxes = ep.evidence.final_boxes;
  return s;
}

/// Appends what `mode` retains about a finished episode; earlier entries are
/// left untouched.
inline MemoryState update_memory(MemoryState memory, const Episode& ep, const std::optional<Reflection>& reflection,
                                 MemoryMode mode) {
  memory.mode = mode;
  if (mode == MemoryMode::None) return memory;
  EpisodeSummary summary = summarize(ep);
  const bool usable_reflection =
      reflection && (!reflection->text.empty() || !reflection->known_mines.empty() || !reflection->stuck_boxes.empty());
  if (mode == MemoryMode::ReflectionOnly && usable_reflection) {
    summary = EpisodeSummary{summary.episode, summary.success, {}, {}, std::nullopt, {}};
  }
  memory.episode_summaries.push_back(std::move(summary));
  if (mode != MemoryMode::TrajectoryOnly && usable_reflection) memory.reflections.push_back(*reflection);
  return memory;
}

template <Environment Env>
Reflection reflect(const Env& env, const Episode& last, const Observation& initial, const MemoryState& memory,
                   const PolicyBackend& policy, double temperature, Rng& rng) {
  if (last.success) throw std::logic_error("reflect is only defined after a failed episode");
  const auto actions = last.actions();
  return policy.reflect(ReflectContext{env.task(), initial, last.final_observation, actions, last.evidence, memory,
                                       last.episode_index, temperature},
                        rng);
}

struct TrialOptions {
  int episodes = 3;
  MemoryMode memory_mode = MemoryMode::Both;
  double temperature = 1.0;
  std::optional<double> reflection_temperature;  // defaults to `temperature`
};

/// Up to N sequential episodes from the same initial state, stopping at the
/// first success. Fully determined by (task, policy, options, stream).
template <Environment Env>
Trial run_trial(const Env& env, const PolicyBackend& policy, const TrialOptions& options, std::uint64_t stream) {
  if (options.episodes < 1) throw std::invalid_argument("episode budget must be at least 1");
  Trial trial;
  trial.task = env.task();
  trial.budget = options.episodes;
  trial.rng_stream = stream;
  MemoryState memory;
  memory.mode = options.memory_mode;
  const Observation initial = env.observe(env.reset());

  for (int n = 0; n < options.episodes; ++n) {
    Rng rng(derive_seed(stream, {static_cast<std::uint64_t>(n)}));
    trial.episodes.push_back(run_episode(env, policy, memory, n, options.temperature, rng));
    trial.reflections.emplace_back();
    const Episode& ep = trial.episodes.back();
    if (ep.success || n + 1 == options.episodes) break;

    std::optional<Reflection> reflection;
    if (options.memory_mode == MemoryMode::ReflectionOnly || options.memory_mode == MemoryMode::Both) {
      Rng reflect_rng(derive_seed(stream, {static_cast<std::uint64_t>(n), 0x5245464CULL}));
      reflection = reflect(env, ep, initial, memory, policy,
                           options.reflection_temperature.value_or(options.temperature), reflect_rng);
      trial.reflections.back() = reflection;
    }
    memory = update_memory(std::move(memory), ep, reflection, options.memory_mode);
  }
  return trial;
}

}  // namespace metatrial
