#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "metatrial/rollout/trial.hpp"

namespace metatrial {

struct DiscountConfig {
  double gamma_step = 0.95;
  double gamma_traj = 0.6;

  void validate() const {
    if (!(gamma_step >= 0.0 && gamma_step <= 1.0))
      throw std::invalid_argument("gamma_step must lie in [0, 1], got " + std::to_string(gamma_step));
    if (!(gamma_traj >= 0.0 && gamma_traj <= 1.0))
      throw std::invalid_argument("gamma_traj must lie in [0, 1], got " + std::to_string(gamma_traj));
  }
  friend bool operator==(const DiscountConfig&, const DiscountConfig&) = default;
};

// g_t = r_t + gamma_step * g_{t+1}
inline std::vector<double> within_episode_returns(std::span<const double> rewards, double gamma_step) {
  std::vector<double> g(rewards.size());
  double next = 0.0;
  for (std::size_t t = rewards.size(); t-- > 0;) next = g[t] = rewards[t] + gamma_step * next;
  return g;
}

/// G_t^(n) = g_t^(n) + sum_{m>n} gamma_traj^(m-n) g_0^(m) over the episodes
/// present, via the carry C_n = gamma_traj * G_0^(n+1).
inline std::vector<std::vector<double>> cross_episode_returns(const std::vector<std::vector<double>>& g,
                                                              double gamma_traj) {
  std::vector<std::vector<double>> G(g.size());
  double carry = 0.0;
  for (std::size_t n = g.size(); n-- > 0;) {
    G[n].resize(g[n].size());
    for (std::size_t t = 0; t < g[n].size(); ++t) G[n][t] = g[n][t] + carry;
    const double start = G[n].empty() ? carry : G[n][0];
    carry = gamma_traj * start;
  }
  return G;
}

// G_0^(0), the per-trial value whose expectation is the training objective.
inline double trial_objective(const std::vector<std::vector<double>>& G) {
  return G.empty() || G.front().empty() ? 0.0 : G.front().front();
}

struct ReturnTable {
  std::vector<std::vector<double>> g;
  std::vector<std::vector<double>> G;
  double trial_objective = 0.0;

  // Return credited to the reflection written after episode n:
  // gamma_traj * G_0^(n+1), or 0 when no later episode exists.
  double reflection_return(std::size_t n, double gamma_traj) const {
    if (n + 1 >= G.size() || G[n + 1].empty()) return 0.0;
    return gamma_traj * G[n + 1][0];
  }
};

inline ReturnTable compute_returns(const std::vector<std::vector<double>>& rewards, const DiscountConfig& discount) {
  ReturnTable table;
  for (const auto& r : rewards) table.g.push_back(within_episode_returns(r, discount.gamma_step));
  table.G = cross_episode_returns(table.g, discount.gamma_traj);
  table.trial_objective = trial_objective(table.G);
  return table;
}

inline ReturnTable compute_returns(const Trial& trial, const DiscountConfig& discount) {
  return compute_returns(trial.rewards(), discount);
}

}  // namespace metatrial
