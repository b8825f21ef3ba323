#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "metatrial/core/parallel.hpp"
#include "metatrial/core/rng.hpp"
#include "metatrial/credit/advantages.hpp"
#include "metatrial/credit/returns.hpp"
#include "metatrial/env/environment.hpp"
#include "metatrial/env/task_sets.hpp"
#include "metatrial/policy/backend.hpp"
#include "metatrial/policy/linear_policy.hpp"
#include "metatrial/rollout/rollout.hpp"
#include "metatrial/trainer/config.hpp"

namespace metatrial {

inline constexpr double kDivergenceLimit = 1e6;

/// The trials of one task together with their credit assignment.
struct TaskGroup {
  TaskInstance task;
  int task_index = 0;
  std::vector<Trial> trials;
  std::vector<ReturnTable> returns;
  AdvantageTable advantages;
};

struct EpochMetrics {
  int epoch = 0;
  double mean_objective = 0.0;
  double success_rate = 0.0;
  double mean_episodes = 0.0;
  double grad_norm = 0.0;
  std::size_t episodes = 0;

  friend bool operator==(const EpochMetrics&, const EpochMetrics&) = default;
};

inline std::uint64_t trial_stream(std::uint64_t root, int epoch, int task, int trial) {
  return derive_seed(root, {0x5452494CULL, static_cast<std::uint64_t>(epoch), static_cast<std::uint64_t>(task),
                            static_cast<std::uint64_t>(trial)});
}

/// Rolls out group_size trials for each of batch_tasks sampled tasks and
/// assigns credit. Results are ordered by (task, trial) whatever the thread
/// count.
inline std::vector<TaskGroup> collect_batch(const TrainConfig& config, const TaskSampler& sampler,
                                            const PolicyBackend& policy, int epoch, std::uint64_t root_seed) {
  const int tasks = config.batch_tasks;
  const int group = config.group_size;
  std::vector<TaskGroup> groups(static_cast<std::size_t>(tasks));
  std::vector<std::unique_ptr<GridEnvironment>> envs(static_cast<std::size_t>(tasks));
  for (int b = 0; b < tasks; ++b) {
    groups[b].task = sampler(epoch, b);
    groups[b].task_index = b;
    groups[b].trials.resize(static_cast<std::size_t>(group));
    envs[b] = std::make_unique<GridEnvironment>(groups[b].task);
  }
  const TrialOptions options{config.episode_budget(), config.memory_mode, config.rollout_temperature, std::nullopt};
  const unsigned threads = config.threads == 0 ? default_thread_count() : config.threads;
  parallel_for(
      static_cast<std::size_t>(tasks * group),
      [&](std::size_t k) {
        const int b = static_cast<int>(k) / group, i = static_cast<int>(k) % group;
        groups[b].trials[i] = run_trial(*envs[b], policy, options, trial_stream(root_seed, epoch, b, i));
      },
      threads);
  for (auto& g : groups) {
    for (const auto& t : g.trials) g.returns.push_back(compute_returns(t, config.discount));
    g.advantages = advantages(g.returns, config.estimator, config.discount.gamma_traj);
  }
  return groups;
}

/// Sum of A_t^(n) * grad log pi over every action step of each task's group,
/// averaged over tasks. Reflection steps carry no parametric gradient.
inline std::vector<double> policy_gradient(const PolicyParams& params, const std::vector<TaskGroup>& groups,
                                           unsigned threads = 1) {
  std::vector<std::pair<std::size_t, std::size_t>> index;
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (std::size_t i = 0; i < groups[g].trials.size(); ++i) index.emplace_back(g, i);
  std::vector<std::vector<double>> partial(index.size(), std::vector<double>(params.theta.size(), 0.0));
  parallel_for(
      index.size(),
      [&](std::size_t k) {
        const auto [g, i] = index[k];
        const Trial& trial = groups[g].trials[i];
        const auto& adv = groups[g].advantages.trials[i];
        for (std::size_t n = 0; n < trial.episodes.size(); ++n) {
          const Episode& ep = trial.episodes[n];
          for (std::size_t t = 0; t < ep.steps.size(); ++t) {
            const Step& step = ep.steps[t];
            if (!step.action) continue;
            accumulate_score(params, step.observation, ep.memory_used, *step.action, adv.steps[n][t], partial[k]);
          }
        }
      },
      threads);
  std::vector<double> grad(params.theta.size(), 0.0);
  for (const auto& p : partial)
    for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += p[j];
  if (!groups.empty())
    for (double& v : grad) v /= static_cast<double>(groups.size());
  return grad;
}

struct Checkpoint {
  static constexpr int kFormatVersion = 1;
  PolicyParams params;
  std::vector<double> velocity;
  int epoch = 0;  // completed updates
  std::uint64_t root_seed = 0;
  EpochMetrics metrics;
  TrainConfig config;
  TaskInstance task_shape;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

/// Gradient-ascent outer loop. One call to run_epoch() is one update.
class Trainer {
 public:
  Trainer(TrainConfig config, TaskInstance task_shape, PolicyParams init, std::uint64_t root_seed)
      : config_(std::move(config)),
        shape_(task_shape),
        sampler_(training_sampler(task_shape, root_seed)),
        params_(std::make_shared<const PolicyParams>(std::move(init))),
        velocity_(params_->theta.size(), 0.0),
        root_seed_(root_seed) {
    config_.validate();
    if (config_.mode == TrainMode::RL) config_.episodes_per_trial = 1;
    if (params_->kind != shape_.env_kind || params_->board_size != shape_.board_size)
      throw std::invalid_argument("initial parameters do not match the task shape");
  }

  static Trainer resume(const Checkpoint& cp) {
    Trainer t(cp.config, cp.task_shape, cp.params, cp.root_seed);
    t.velocity_ = cp.velocity;
    t.epoch_ = cp.epoch;
    t.last_ = cp.metrics;
    return t;
  }

  const TrainConfig& config() const { return config_; }
  const PolicyParams& params() const { return *params_; }
  std::shared_ptr<const PolicyParams> shared_params() const { return params_; }
  int epoch() const { return epoch_; }
  const std::vector<TaskGroup>& last_batch() const { return last_batch_; }

  // Replace the task sampler (the default draws training-range seeds).
  void set_sampler(TaskSampler sampler) { sampler_ = std::move(sampler); }
  void keep_batches(bool keep) { keep_batches_ = keep; }

  EpochMetrics run_epoch() {
    const ParametricPolicy policy(params_);
    auto groups = collect_batch(config_, sampler_, policy, epoch_, root_seed_);
    const unsigned threads = config_.threads == 0 ? default_thread_count() : config_.threads;
    auto grad = policy_gradient(*params_, groups, threads);

    double norm = 0.0;
    for (double v : grad) norm += v * v;
    norm = std::sqrt(norm);
    if (config_.grad_clip > 0.0 && norm > config_.grad_clip)
      for (double& v : grad) v *= config_.grad_clip / norm;

    PolicyParams next = *params_;
    for (std::size_t j = 0; j < next.theta.size(); ++j) {
      velocity_[j] = config_.momentum * velocity_[j] + grad[j];
      next.theta[j] += config_.learning_rate * velocity_[j];
    }
    ++next.version;
    for (std::size_t j = 0; j < next.theta.size(); ++j) {
      if (!std::isfinite(next.theta[j]) || std::abs(next.theta[j]) > kDivergenceLimit) {
        std::ostringstream msg;
        msg << "training diverged at epoch " << epoch_ << ": theta[" << j << "] = " << next.theta[j]
            << " exceeds " << kDivergenceLimit << " (gradient norm " << norm << ")";
        throw std::runtime_error(msg.str());
      }
    }
    params_ = std::make_shared<const PolicyParams>(std::move(next));

    EpochMetrics m;
    m.epoch = epoch_;
    m.grad_norm = norm;
    std::size_t trials = 0, successes = 0;
    for (const auto& g : groups)
      for (std::size_t i = 0; i < g.trials.size(); ++i) {
        ++trials;
        successes += g.trials[i].success();
        m.episodes += g.trials[i].episodes.size();
        m.mean_objective += g.returns[i].trial_objective;
      }
    m.mean_objective /= static_cast<double>(trials);
    m.success_rate = static_cast<double>(successes) / static_cast<double>(trials);
    m.mean_episodes = static_cast<double>(m.episodes) / static_cast<double>(trials);
    ++epoch_;
    last_ = m;
    if (keep_batches_) last_batch_ = std::move(groups);
    return m;
  }

  Checkpoint checkpoint() const { return {*params_, velocity_, epoch_, root_seed_, last_, config_, shape_}; }

 private:
  TrainConfig config_;
  TaskInstance shape_;
  TaskSampler sampler_;
  std::shared_ptr<const PolicyParams> params_;
  std::vector<double> velocity_;
  std::uint64_t root_seed_ = 0;
  int epoch_ = 0;
  EpochMetrics last_;
  bool keep_batches_ = false;
  std::vector<TaskGroup> last_batch_;
};

/// Runs the configured number of epochs and returns the final checkpoint.
inline Checkpoint train(const TrainConfig& config, const TaskInstance& task_shape, std::uint64_t root_seed,
                        std::function<void(const EpochMetrics&, const Trainer&)> on_epoch = {}) {
  Trainer trainer(config, task_shape, PolicyParams::zeros(task_shape.env_kind, task_shape.board_size), root_seed);
  while (trainer.epoch() < config.epochs) {
    const auto m = trainer.run_epoch();
    if (on_epoch) on_epoch(m, trainer);
  }
  return trainer.checkpoint();
}

}  // namespace metatrial
