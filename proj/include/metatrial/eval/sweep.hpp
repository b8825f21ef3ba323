#pragma once

#include <memory>
#include <stdexcept>
#include <vector>

#include "metatrial/env/task_sets.hpp"
#include "metatrial/eval/pass_at_k.hpp"
#include "metatrial/policy/backend.hpp"
#include "metatrial/policy/linear_policy.hpp"

namespace metatrial {

struct SweepReport {
  std::vector<int> axis;  // n_boxes or n_mines
  std::vector<PassAtKReport> rows;
  TaskInstance shape;     // config snapshot: task shape with difficulty unset
  EvalOptions options;
  int tasks_per_value = 0;
};

/// pass@k of a frozen policy at each difficulty; no retraining.
inline SweepReport difficulty_sweep(const PolicyBackend& policy, const TaskInstance& shape,
                                    const std::vector<int>& axis, int tasks_per_value, const EvalOptions& options) {
  if (axis.empty()) throw std::invalid_argument("sweep axis is empty");
  for (std::size_t i = 1; i < axis.size(); ++i)
    if (axis[i] <= axis[i - 1]) throw std::invalid_argument("sweep axis must be strictly increasing");
  SweepReport report{axis, {}, shape, options, tasks_per_value};
  for (int value : axis) {
    TaskInstance t = shape;
    t.difficulty = value;
    validate_task(t);
    const auto tasks = held_out_tasks(t, tasks_per_value);
    report.rows.push_back(pass_at_k(tasks, policy, options));
  }
  return report;
}

inline SweepReport difficulty_sweep(const PolicyParams& params, const TaskInstance& shape,
                                    const std::vector<int>& axis, int tasks_per_value, const EvalOptions& options) {
  const ParametricPolicy policy(std::make_shared<const PolicyParams>(params));
  return difficulty_sweep(policy, shape, axis, tasks_per_value, options);
}

}  // namespace metatrial
