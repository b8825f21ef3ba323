#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "metatrial/credit/returns.hpp"

namespace metatrial {

// GroupNorm: z-score of trial objectives, broadcast to every action.
// GroupNormStepLevel: G_t^(n) normalized against the group's G_0^(n);
//   non-canonical, falls back to the broadcast z when fewer than two trials
//   reached episode n.
// LeaveOneOut: J_i minus the mean of the other trials' objectives, broadcast.
// MeanBaseline: G_t^(n) minus the group mean objective.
enum class Estimator { GroupNorm, GroupNormStepLevel, LeaveOneOut, MeanBaseline };

inline std::string_view to_string(Estimator e) {
  switch (e) {
    case Estimator::GroupNorm: return "group_norm";
    case Estimator::GroupNormStepLevel: return "group_norm_step";
    case Estimator::LeaveOneOut: return "leave_one_out";
    case Estimator::MeanBaseline: return "mean_baseline";
  }
  return "group_norm";
}

inline Estimator parse_estimator(std::string_view s) {
  if (s == "group_norm") return Estimator::GroupNorm;
  if (s == "group_norm_step") return Estimator::GroupNormStepLevel;
  if (s == "leave_one_out") return Estimator::LeaveOneOut;
  if (s == "mean_baseline") return Estimator::MeanBaseline;
  throw std::invalid_argument("unknown estimator '" + std::string(s) + "'");
}

inline constexpr double kAdvantageEpsilon = 1e-8;

struct TrialAdvantages {
  std::vector<std::vector<double>> steps;  // A_t^(n)
  std::vector<double> reflections;         // advantage of the reflection after episode n
  double trial_level = 0.0;                // the broadcast value, where one exists
};

struct AdvantageTable {
  Estimator estimator = Estimator::GroupNorm;
  std::vector<TrialAdvantages> trials;
};

namespace detail {

struct Moments {
  double mean = 0.0;
  double std = 0.0;  // population
};

inline Moments moments(std::span<const double> xs) {
  Moments m;
  if (xs.empty()) return m;
  for (double x : xs) m.mean += x;
  m.mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - m.mean) * (x - m.mean);
  m.std = std::sqrt(var / static_cast<double>(xs.size()));
  return m;
}

inline TrialAdvantages broadcast(const ReturnTable& r, double value) {
  TrialAdvantages a;
  a.trial_level = value;
  for (const auto& ep : r.G) a.steps.emplace_back(ep.size(), value);
  a.reflections.assign(r.G.size(), value);
  return a;
}

}  // namespace detail

inline AdvantageTable advantages(std::span<const ReturnTable> group, Estimator estimator, double gamma_traj,
                                 double epsilon = kAdvantageEpsilon) {
  const std::size_t k = group.size();
  if (k == 0) throw std::invalid_argument("advantage estimation needs a non-empty group");
  if (k < 2 && estimator != Estimator::MeanBaseline)
    throw std::invalid_argument("group size must be at least 2 for " + std::string(to_string(estimator)));

  std::vector<double> objectives;
  for (const auto& r : group) objectives.push_back(r.trial_objective);
  const auto m = detail::moments(objectives);

  AdvantageTable table;
  table.estimator = estimator;
  auto z = [&](double j) { return m.std < epsilon ? 0.0 : (j - m.mean) / m.std; };

  switch (estimator) {
    case Estimator::GroupNorm:
      for (const auto& r : group) table.trials.push_back(detail::broadcast(r, z(r.trial_objective)));
      break;

    case Estimator::LeaveOneOut: {
      double total = 0.0;
      for (double j : objectives) total += j;
      for (const auto& r : group) {
        const double others = (total - r.trial_objective) / static_cast<double>(k - 1);
        table.trials.push_back(detail::broadcast(r, r.trial_objective - others));
      }
      break;
    }

    case Estimator::MeanBaseline:
      for (const auto& r : group) {
        TrialAdvantages a;
        a.trial_level = r.trial_objective - m.mean;
        for (const auto& ep : r.G) {
          auto& row = a.steps.emplace_back();
          for (double G : ep) row.push_back(G - m.mean);
        }
        for (std::size_t n = 0; n < r.G.size(); ++n) a.reflections.push_back(r.reflection_return(n, gamma_traj) - m.mean);
        table.trials.push_back(std::move(a));
      }
      break;

    case Estimator::GroupNormStepLevel: {
      std::size_t depth = 0;
      for (const auto& r : group) depth = std::max(depth, r.G.size());
      std::vector<detail::Moments> aligned(depth);
      std::vector<bool> defined(depth, false);
      for (std::size_t n = 0; n < depth; ++n) {
        std::vector<double> starts;
        for (const auto& r : group)
          if (n < r.G.size() && !r.G[n].empty()) starts.push_back(r.G[n][0]);
        if (starts.size() >= 2) {
          aligned[n] = detail::moments(starts);
          defined[n] = true;
        }
      }
      for (const auto& r : group) {
        TrialAdvantages a = detail::broadcast(r, z(r.trial_objective));
        for (std::size_t n = 0; n < r.G.size(); ++n) {
          if (!defined[n]) continue;
          for (std::size_t t = 0; t < r.G[n].size(); ++t)
            a.steps[n][t] = aligned[n].std < epsilon ? 0.0 : (r.G[n][t] - aligned[n].mean) / aligned[n].std;
        }
        table.trials.push_back(std::move(a));
      }
      break;
    }
  }
  return table;
}

}  // namespace metatrial
