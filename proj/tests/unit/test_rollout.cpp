#include <catch_amalgamated.hpp>

#include "fixtures.hpp"

using namespace metatrial;
using fixture::ScriptedPolicy;

namespace {

class SolutionPolicy final : public PolicyBackend {
 public:
  explicit SolutionPolicy(std::vector<Direction> moves) : moves_(std::move(moves)) {}
  Turn act(const TurnContext& ctx, Rng&) const override { return {{Action{moves_.at(ctx.history.size())}}, {}}; }
  Reflection reflect(const ReflectContext& ctx, Rng&) const override { return structured_reflection(ctx); }

 private:
  std::vector<Direction> moves_;
};

// Records the memory each episode starts with.
class MemoryProbe final : public PolicyBackend {
 public:
  Turn act(const TurnContext& ctx, Rng&) const override {
    if (ctx.history.empty()) seen.push_back(ctx.memory);
    throw PolicyFailure("probe");
  }
  Reflection reflect(const ReflectContext& ctx, Rng&) const override {
    auto r = structured_reflection(ctx);
    r.text = "note " + std::to_string(ctx.episode_index);
    return r;
  }
  mutable std::vector<MemoryState> seen;
};

}  // namespace

TEST_CASE("following the recorded solution succeeds in one episode") {
  const GridEnvironment env(make_task(EnvKind::Sokoban, 6, 2, 7));
  const SolutionPolicy policy(env.sokoban_solution());
  const Trial trial = run_trial(env, policy, {3, MemoryMode::Both, 1.0, {}}, 1);
  REQUIRE(trial.episodes.size() == 1);
  CHECK(trial.success());
  CHECK(trial.first_success() == 1);
  CHECK(trial.episodes[0].steps.back().reward == kSuccessReward);
  CHECK(trial.reflection_count() == 0);
}

TEST_CASE("a one-step horizon yields one step") {
  auto task = make_task(EnvKind::Sokoban, 6, 2, 7);
  task.max_steps = 1;
  const GridEnvironment env(task);
  const auto params = std::make_shared<const PolicyParams>(PolicyParams::zeros(EnvKind::Sokoban, 6));
  const ParametricPolicy policy(params);
  Rng rng(3);
  const Episode ep = run_episode(env, policy, MemoryState{}, 0, 1.0, rng);
  CHECK(ep.steps.size() == 1);
  CHECK_FALSE(ep.success);
}

TEST_CASE("trials are determined by their stream") {
  const GridEnvironment env(make_task(EnvKind::MineSweeper, 6, 5, 3));
  auto p = PolicyParams::zeros(EnvKind::MineSweeper, 6);
  p.theta[3] = -2.0;
  const ParametricPolicy policy(std::make_shared<const PolicyParams>(p));
  const TrialOptions options{3, MemoryMode::Both, 1.0, {}};
  auto actions = [&](std::uint64_t stream) {
    std::vector<std::vector<Action>> out;
    for (const auto& e : run_trial(env, policy, options, stream).episodes) out.push_back(e.actions());
    return out;
  };
  CHECK(actions(17) == actions(17));
  bool differs = false;
  for (std::uint64_t s = 18; s < 30 && !differs; ++s) differs = actions(s) != actions(17);
  CHECK(differs);
}

TEST_CASE("a trial stops at the first success") {
  const fixture::TwoCellEnv env(make_task(EnvKind::MineSweeper, 2, 1, 0));  // mine at cell 0
  const fixture::KnownMineAvoider policy;
  const Trial trial = run_trial(env, policy, {3, MemoryMode::Both, 1.0, {}}, 9);
  REQUIRE(trial.episodes.size() == 2);
  CHECK_FALSE(trial.episodes[0].success);
  CHECK(trial.episodes[1].success);
  CHECK(trial.first_success() == 2);
  REQUIRE(trial.reflections[0].has_value());
  CHECK(trial.reflections[0]->known_mines == std::vector<int>{0});
  CHECK_FALSE(trial.reflections[1].has_value());
}

TEST_CASE("a failing trial uses the full budget with one reflection per gap") {
  const fixture::CoinEnv env(make_task(EnvKind::MineSweeper, 1, 1, 0));
  const fixture::CoinPolicy never(0.0);
  for (int n = 1; n <= 5; ++n) {
    const Trial trial = run_trial(env, never, {n, MemoryMode::Both, 1.0, {}}, 2);
    CHECK(trial.episodes.size() == static_cast<std::size_t>(n));
    CHECK(trial.reflection_count() == static_cast<std::size_t>(n - 1));
    CHECK_FALSE(trial.reflections.back().has_value());
    CHECK(trial.first_success() == 0);
  }
  CHECK_THROWS_AS(run_trial(env, never, {0, MemoryMode::Both, 1.0, {}}, 2), std::invalid_argument);
}

TEST_CASE("memory grows by one entry per finished episode") {
  const GridEnvironment env(make_task(EnvKind::MineSweeper, 5, 3, 3));
  const MemoryProbe probe;
  run_trial(env, probe, {4, MemoryMode::Both, 1.0, {}}, 0);
  REQUIRE(probe.seen.size() == 4);
  for (std::size_t n = 0; n < 4; ++n) {
    CHECK(probe.seen[n].episode_summaries.size() == n);
    CHECK(probe.seen[n].reflections.size() == n);
    if (n > 0) {
      // Earlier entries are carried forward untouched.
      CHECK(std::equal(probe.seen[n - 1].reflections.begin(), probe.seen[n - 1].reflections.end(),
                       probe.seen[n].reflections.begin()));
      CHECK(probe.seen[n].reflections.back().text == "note " + std::to_string(n - 1));
    }
  }
}

TEST_CASE("memory modes decide what is kept") {
  const GridEnvironment env(make_task(EnvKind::MineSweeper, 5, 3, 3));
  auto last_memory = [&](MemoryMode mode) {
    const MemoryProbe probe;
    const Trial trial = run_trial(env, probe, {3, mode, 1.0, {}}, 0);
    return std::pair{probe.seen.back(), trial.reflection_count()};
  };
  const auto [none, none_refl] = last_memory(MemoryMode::None);
  CHECK(none.empty());
  CHECK(none_refl == 0);
  const auto [traj, traj_refl] = last_memory(MemoryMode::TrajectoryOnly);
  CHECK(traj.episode_summaries.size() == 2);
  CHECK(traj.reflections.empty());
  CHECK(traj_refl == 0);
  const auto [refl, refl_refl] = last_memory(MemoryMode::ReflectionOnly);
  CHECK(refl.reflections.size() == 2);
  CHECK(refl_refl == 2);
  for (const auto& s : refl.episode_summaries) CHECK(s.actions.empty());
}

TEST_CASE("update_memory keeps raw trajectories when the reflection is unusable") {
  Episode ep;
  ep.episode_index = 0;
  ep.steps.push_back({Observation{}, Action{3}, 0.0, 0, {}});
  ep.evidence.revealed = {1, 2};
  const Reflection empty_text{0, {}, {}, "", "prompt"};
  const auto kept = update_memory(MemoryState{}, ep, empty_text, MemoryMode::ReflectionOnly);
  REQUIRE(kept.episode_summaries.size() == 1);
  CHECK(kept.episode_summaries[0].actions == fixture::as_actions({3}));
  CHECK(kept.reflections.empty());

  const Reflection useful{0, {}, {}, "go left", ""};
  const auto stripped = update_memory(MemoryState{}, ep, useful, MemoryMode::ReflectionOnly);
  CHECK(stripped.episode_summaries[0].actions.empty());
  CHECK(stripped.episode_summaries[0].visited.empty());
  CHECK(stripped.reflections.size() == 1);

  const auto both = update_memory(MemoryState{}, ep, useful, MemoryMode::Both);
  CHECK(both.episode_summaries[0].visited == std::vector<int>{1, 2});
  CHECK(both.reflections.size() == 1);
}

TEST_CASE("a MineSweeper explosion becomes a known mine in the reflection") {
  const GridEnvironment env(make_task(EnvKind::MineSweeper, 5, 6, 11));
  auto state = env.reset();
  env.step(state, {0});
  const auto& m = std::get<MinesweeperState>(state);
  const int mine = m.mine_cells().front();
  ScriptedPolicy policy({Action{0}, Action{mine}});
  const Trial trial = run_trial(env, policy, {2, MemoryMode::Both, 1.0, {}}, 4);
  const auto& first = trial.episodes[0];
  if (first.steps.size() == 2) {
    CHECK(first.evidence.exploded == mine);
    REQUIRE(trial.reflections[0].has_value());
    CHECK(trial.reflections[0]->known_mines == std::vector<int>{mine});
    CHECK(trial.reflections[0]->text ==
          "Revealing (" + std::to_string(mine / 5 + 1) + ", " + std::to_string(mine % 5 + 1) + ") hit a mine; avoid it.");
  } else {
    // The first click already cascaded to a win.
    CHECK(first.success);
  }
}

TEST_CASE("policy failures and inadmissible actions end the episode") {
  const GridEnvironment env(make_task(EnvKind::MineSweeper, 5, 3, 3));
  Rng rng(0);
  const ScriptedPolicy nothing({});
  const Episode a = run_episode(env, nothing, MemoryState{}, 0, 1.0, rng);
  REQUIRE(a.steps.size() == 1);
  CHECK_FALSE(a.steps[0].action.has_value());
  CHECK(a.steps[0].reward == 0.0);
  CHECK_FALSE(a.success);

  const ScriptedPolicy outside({Action{99}});
  const Episode b = run_episode(env, outside, MemoryState{}, 0, 1.0, rng);
  REQUIRE(b.steps.size() == 1);
  CHECK_FALSE(b.steps[0].action.has_value());
  CHECK(b.actions().empty());
}

TEST_CASE("each step records the observation it was chosen in") {
  const GridEnvironment env(make_task(EnvKind::Sokoban, 6, 2, 7));
  const auto solution = env.sokoban_solution();
  const SolutionPolicy policy(solution);
  Rng rng(0);
  const Episode ep = run_episode(env, policy, MemoryState{}, 0, 1.0, rng);
  auto state = env.reset();
  for (const auto& step : ep.steps) {
    CHECK(step.observation == env.observe(state));
    env.step(state, *step.action);
  }
  CHECK(ep.final_observation == env.observe(state));
  CHECK(ep.evidence.final_boxes == std::get<SokobanState>(state).boxes);
}
