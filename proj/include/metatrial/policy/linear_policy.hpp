#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "metatrial/core/error.hpp"
#include "metatrial/env/types.hpp"
#include "metatrial/policy/features.hpp"
#include "metatrial/policy/memory.hpp"

namespace metatrial {

// Bias slots: one per direction for Sokoban, one per cell for MineSweeper.
constexpr int slot_count(EnvKind kind, int board_size) {
  return kind == EnvKind::Sokoban ? 4 : board_size * board_size;
}

/// Weights of the linear-softmax policy: feature_dim(kind) weights followed
/// by slot_count(kind, board_size) biases.
struct PolicyParams {
  EnvKind kind = EnvKind::MineSweeper;
  int board_size = 0;
  std::vector<double> theta;
  std::uint64_t version = 0;

  static PolicyParams zeros(EnvKind kind, int board_size) {
    PolicyParams p{kind, board_size, {}, 0};
    p.theta.assign(static_cast<std::size_t>(feature_dim(kind) + slot_count(kind, board_size)), 0.0);
    return p;
  }

  int features() const { return feature_dim(kind); }
  std::span<const double> weights() const { return {theta.data(), static_cast<std::size_t>(features())}; }
  double bias(int slot) const { return theta[static_cast<std::size_t>(features() + slot)]; }

  bool finite() const {
    return std::all_of(theta.begin(), theta.end(), [](double v) { return std::isfinite(v); });
  }
  void check_compatible(const Observation& obs) const {
    if (obs.kind != kind || obs.board_size != board_size)
      throw std::invalid_argument("policy parameters do not match the observation's environment");
  }

  friend bool operator==(const PolicyParams&, const PolicyParams&) = default;
};

struct ActionDistribution {
  std::vector<double> logits;  // aligned with admissible_actions
  double temperature = 1.0;

  std::vector<double> probabilities() const {
    std::vector<double> p(logits.size());
    if (p.empty()) return p;
    const double top = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) total += p[i] = std::exp((logits[i] - top) / temperature);
    for (double& v : p) v /= total;
    return p;
  }
};

namespace detail {

inline std::vector<double> logits_of(const PolicyParams& params, const Observation& obs, const FeatureMatrix& fm) {
  std::vector<double> logits(static_cast<std::size_t>(fm.rows));
  const auto w = params.weights();
  for (int i = 0; i < fm.rows; ++i) {
    const auto f = fm.row(i);
    double z = params.bias(obs.admissible_actions[i].id);
    for (int j = 0; j < fm.cols; ++j) z += w[j] * f[j];
    logits[i] = z;
  }
  return logits;
}

}  // namespace detail

inline ActionDistribution action_distribution(const PolicyParams& params, const Observation& obs,
                                              const MemoryState& memory, double temperature) {
  if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
  params.check_compatible(obs);
  const auto fm = encode_all(obs, memory);
  return {detail::logits_of(params, obs, fm), temperature};
}

struct LogProbGrad {
  double log_prob = 0.0;
  std::vector<double> gradient;
};

/// log pi(action | obs, memory) at temperature 1, with its gradient
/// phi(action) - sum_i p_i phi(a_i) (biases included as one-hot features).
inline LogProbGrad log_prob_grad(const PolicyParams& params, const Observation& obs, const MemoryState& memory,
                                 Action action) {
  params.check_compatible(obs);
  const auto fm = encode_all(obs, memory);
  const auto logits = detail::logits_of(params, obs, fm);
  const auto probs = ActionDistribution{logits, 1.0}.probabilities();
  int chosen = -1;
  for (int i = 0; i < fm.rows; ++i)
    if (obs.admissible_actions[i] == action) chosen = i;
  if (chosen < 0) throw ProtocolError("action is not admissible");

  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - top);

  LogProbGrad out;
  out.log_prob = logits[chosen] - top - std::log(sum);
  out.gradient.assign(params.theta.size(), 0.0);
  const int F = fm.cols;
  for (int i = 0; i < fm.rows; ++i) {
    const double coef = (i == chosen ? 1.0 : 0.0) - probs[i];
    const auto f = fm.row(i);
    for (int j = 0; j < F; ++j) out.gradient[j] += coef * f[j];
    out.gradient[static_cast<std::size_t>(F + obs.admissible_actions[i].id)] += coef;
  }
  return out;
}

/// Adds weight * grad log pi(action) into `accumulator` without allocating a
/// separate gradient vector.
inline void accumulate_score(const PolicyParams& params, const Observation& obs, const MemoryState& memory,
                             Action action, double weight, std::span<double> accumulator) {
  if (weight == 0.0) return;
  const auto fm = encode_all(obs, memory);
  const auto probs = ActionDistribution{detail::logits_of(params, obs, fm), 1.0}.probabilities();
  const int F = fm.cols;
  bool found = false;
  for (int i = 0; i < fm.rows; ++i) {
    const bool is_chosen = obs.admissible_actions[i] == action;
    found |= is_chosen;
    const double coef = weight * ((is_chosen ? 1.0 : 0.0) - probs[i]);
    const auto f = fm.row(i);
    for (int j = 0; j < F; ++j) accumulator[j] += coef * f[j];
    accumulator[static_cast<std::size_t>(F + obs.admissible_actions[i].id)] += coef;
  }
  if (!found) throw ProtocolError("action is not admissible");
}

}  // namespace metatrial
