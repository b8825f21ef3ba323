#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "metatrial/core/parallel.hpp"
#include "metatrial/env/environment.hpp"
#include "metatrial/policy/backend.hpp"
#include "metatrial/rollout/rollout.hpp"

namespace metatrial {

// Shannon entropy in nats of the empirical distribution given by `counts`.
inline double entropy_from_counts(std::span<const std::size_t> counts) {
  double total = 0.0;
  for (auto c : counts) total += static_cast<double>(c);
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    h -= p * std::log(p);
  }
  return h;
}

// Two episodes share a key iff they visit the same states with the same
// actions, including the final state.
inline std::string trajectory_key(const Episode& ep) {
  std::string key;
  for (const auto& s : ep.steps) {
    key += s.observation.cells;
    key += '|';
    key += s.action ? std::to_string(s.action->id) : std::string("-");
    key += ';';
  }
  key += ep.final_observation.cells;
  return key;
}

struct DiversityReport {
  int samples = 0;
  std::vector<double> entropy;          // per task, nats
  std::vector<std::size_t> distinct;    // per task
  double mean_entropy = 0.0;
};

template <class MakeEnv>
DiversityReport diversity_entropy(std::span<const TaskInstance> tasks, MakeEnv&& make_env,
                                  const PolicyBackend& policy, int samples, double temperature, std::uint64_t seed,
                                  unsigned threads = 0) {
  if (samples < 2) throw std::invalid_argument("diversity needs at least 2 samples per task");
  DiversityReport report;
  report.samples = samples;
  report.entropy.resize(tasks.size());
  report.distinct.resize(tasks.size());
  parallel_for(
      tasks.size(),
      [&](std::size_t i) {
        const auto env = make_env(tasks[i]);
        const MemoryState empty{MemoryMode::None, {}, {}};
        std::map<std::string, std::size_t> buckets;
        for (int j = 0; j < samples; ++j) {
          Rng rng(derive_seed(seed, {0x4456ULL, i, static_cast<std::uint64_t>(j)}));
          ++buckets[trajectory_key(run_episode(env, policy, empty, 0, temperature, rng))];
        }
        std::vector<std::size_t> counts;
        for (const auto& [key, c] : buckets) counts.push_back(c);
        report.entropy[i] = entropy_from_counts(counts);
        report.distinct[i] = counts.size();
      },
      threads == 0 ? default_thread_count() : threads);
  for (double h : report.entropy) report.mean_entropy += h;
  if (!tasks.empty()) report.mean_entropy /= static_cast<double>(tasks.size());
  return report;
}

inline DiversityReport diversity_entropy(std::span<const TaskInstance> tasks, const PolicyBackend& policy, int samples,
                                         double temperature, std::uint64_t seed, unsigned threads = 0) {
  return diversity_entropy(tasks, [](const TaskInstance& t) { return GridEnvironment(t); }, policy, samples,
                           temperature, seed, threads);
}

}  // namespace metatrial
