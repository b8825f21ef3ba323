#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "metatrial/core/parallel.hpp"
#include "metatrial/core/rng.hpp"
#include "metatrial/env/environment.hpp"
#include "metatrial/policy/backend.hpp"
#include "metatrial/rollout/rollout.hpp"

namespace metatrial {

// Independent: k fresh episodes with empty memory, solved if any succeeds.
// SequentialWithMemory: one trial with N = k; pass@j means solved within the
// first j episodes.
enum class Protocol { Independent, SequentialWithMemory };

inline std::string_view to_string(Protocol p) {
  return p == Protocol::Independent ? "independent" : "sequential";
}

inline Protocol parse_protocol(std::string_view s) {
  if (s == "independent") return Protocol::Independent;
  if (s == "sequential") return Protocol::SequentialWithMemory;
  throw std::invalid_argument("unknown protocol '" + std::string(s) + "'");
}

inline constexpr double kEvalTemperature = 0.7;

struct EvalOptions {
  int k_max = 3;
  Protocol protocol = Protocol::SequentialWithMemory;
  MemoryMode memory_mode = MemoryMode::Both;
  double temperature = kEvalTemperature;
  std::optional<double> reflection_temperature;  // defaults to `temperature`
  std::uint64_t seed = 0;
  unsigned threads = 0;

  friend bool operator==(const EvalOptions&, const EvalOptions&) = default;
};

struct TaskOutcome {
  std::uint64_t seed = 0;
  int first_success = 0;  // 1-based attempt that succeeded, 0 if none within k_max
  int episodes = 0;
};

struct PassAtKReport {
  Protocol protocol = Protocol::SequentialWithMemory;
  MemoryMode memory_mode = MemoryMode::Both;
  std::uint64_t seed = 0;
  double temperature = kEvalTemperature;
  std::vector<int> k_values;
  std::vector<double> rates;  // aligned with k_values
  std::vector<TaskOutcome> tasks;

  std::size_t task_count() const { return tasks.size(); }
  double at(int k) const {
    for (std::size_t i = 0; i < k_values.size(); ++i)
      if (k_values[i] == k) return rates[i];
    throw std::out_of_range("pass@" + std::to_string(k) + " not in report");
  }
};

inline void finalize_rates(PassAtKReport& report, int k_max) {
  report.k_values.clear();
  report.rates.clear();
  for (int k = 1; k <= k_max; ++k) {
    std::size_t solved = 0;
    for (const auto& t : report.tasks) solved += t.first_success >= 1 && t.first_success <= k;
    report.k_values.push_back(k);
    report.rates.push_back(report.tasks.empty() ? 0.0 : static_cast<double>(solved) / report.tasks.size());
  }
}

/// pass@1..k_max over `tasks`; `make_env` turns a TaskInstance into an
/// Environment. Task i always uses streams derived from (seed, i).
template <class MakeEnv>
PassAtKReport pass_at_k(std::span<const TaskInstance> tasks, MakeEnv&& make_env, const PolicyBackend& policy,
                        const EvalOptions& options) {
  if (options.k_max < 1) throw std::invalid_argument("k_max must be at least 1");
  PassAtKReport report;
  report.protocol = options.protocol;
  report.memory_mode = options.memory_mode;
  report.seed = options.seed;
  report.temperature = options.temperature;
  report.tasks.resize(tasks.size());
  const unsigned threads = options.threads == 0 ? default_thread_count() : options.threads;

  parallel_for(
      tasks.size(),
      [&](std::size_t i) {
        const auto env = make_env(tasks[i]);
        TaskOutcome out;
        out.seed = tasks[i].seed;
        if (options.protocol == Protocol::Independent) {
          const MemoryState empty{MemoryMode::None, {}, {}};
          for (int j = 0; j < options.k_max; ++j) {
            Rng rng(derive_seed(options.seed, {0x494EULL, i, static_cast<std::uint64_t>(j)}));
            ++out.episodes;
            if (run_episode(env, policy, empty, 0, options.temperature, rng).success) {
              out.first_success = j + 1;
              break;
            }
          }
        } else {
          const TrialOptions trial{options.k_max, options.memory_mode, options.temperature,
                                   options.reflection_temperature};
          const Trial t = run_trial(env, policy, trial, derive_seed(options.seed, {0x5345ULL, i}));
          out.first_success = t.first_success();
          out.episodes = static_cast<int>(t.episodes.size());
        }
        report.tasks[i] = out;
      },
      threads);
  finalize_rates(report, options.k_max);
  return report;
}

inline PassAtKReport pass_at_k(std::span<const TaskInstance> tasks, const PolicyBackend& policy,
                               const EvalOptions& options) {
  return pass_at_k(tasks, [](const TaskInstance& t) { return GridEnvironment(t); }, policy, options);
}

}  // namespace metatrial
