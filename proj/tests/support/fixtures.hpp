#pragma once

// Toy environments, scripted policies and a mock completion client.

#include <deque>
#include <mutex>
#include <string>
#include <vector>

#include "metatrial/metatrial.hpp"

namespace fixture {

using namespace metatrial;

// One step: action 1 wins, action 0 loses.
class CoinEnv {
 public:
  struct State {
    bool done = false;
    bool success = false;
  };
  explicit CoinEnv(TaskInstance t) : task_(t) { task_.max_steps = 1; }
  const TaskInstance& task() const { return task_; }
  State reset() const { return {}; }
  Observation observe(const State& s) const {
    Observation o{EnvKind::MineSweeper, 1, s.done ? (s.success ? "W" : "L") : "?", {}};
    if (!s.done) o.admissible_actions = {{0}, {1}};
    return o;
  }
  StepOutcome step(State& s, Action a) const {
    s.done = true;
    s.success = a.id == 1;
    return {s.success ? kSuccessReward : 0.0, true, s.success};
  }
  EpisodeEvidence evidence(const State&) const { return {}; }

 private:
  TaskInstance task_;
};
static_assert(Environment<CoinEnv>);

// Picks the winning coin side with probability p.
class CoinPolicy final : public PolicyBackend {
 public:
  explicit CoinPolicy(double p) : p_(p) {}
  Turn act(const TurnContext&, Rng& rng) const override { return {{Action{rng.uniform() < p_ ? 1 : 0}}, {}}; }
  Reflection reflect(const ReflectContext& ctx, Rng&) const override { return structured_reflection(ctx); }

 private:
  double p_;
};

// Two cells, one mine at (seed % 2); revealing the other cell wins.
class TwoCellEnv {
 public:
  struct State {
    int opened = -1;
    bool done = false;
  };
  explicit TwoCellEnv(TaskInstance t) : task_(t) { task_.max_steps = 1; }
  const TaskInstance& task() const { return task_; }
  int mine() const { return static_cast<int>(task_.seed % 2); }
  State reset() const { return {}; }
  Observation observe(const State& s) const {
    Observation o{EnvKind::MineSweeper, 2, "??", {}};
    if (s.opened >= 0) o.cells[s.opened] = s.opened == mine() ? '*' : '.';
    if (!s.done) o.admissible_actions = {{0}, {1}};
    return o;
  }
  StepOutcome step(State& s, Action a) const {
    s.opened = a.id;
    s.done = true;
    const bool win = a.id != mine();
    return {win ? kSuccessReward : 0.0, true, win};
  }
  EpisodeEvidence evidence(const State& s) const {
    EpisodeEvidence e;
    if (s.opened == mine()) e.exploded = s.opened;
    return e;
  }

 private:
  TaskInstance task_;
};
static_assert(Environment<TwoCellEnv>);

// Opens cell 0 unless memory says it holds a mine.
class KnownMineAvoider final : public PolicyBackend {
 public:
  Turn act(const TurnContext& ctx, Rng&) const override {
    for (const auto& r : ctx.memory.reflections)
      for (int m : r.known_mines)
        if (m == 0) return {{Action{1}}, {}};
    return {{Action{0}}, {}};
  }
  Reflection reflect(const ReflectContext& ctx, Rng&) const override { return structured_reflection(ctx); }
};

// Plays a fixed action list, then gives up.
class ScriptedPolicy final : public PolicyBackend {
 public:
  explicit ScriptedPolicy(std::vector<Action> actions) : actions_(std::move(actions)) {}
  Turn act(const TurnContext& ctx, Rng&) const override {
    if (ctx.history.size() >= actions_.size()) throw PolicyFailure("script exhausted");
    return {{actions_[ctx.history.size()]}, {}};
  }
  Reflection reflect(const ReflectContext& ctx, Rng&) const override { return structured_reflection(ctx); }

 private:
  std::vector<Action> actions_;
};

// Returns queued replies in order (repeating the last), recording requests.
class MockClient final : public TextCompletionClient {
 public:
  explicit MockClient(std::vector<std::string> replies) : replies_(replies.begin(), replies.end()) {}
  std::string complete(const CompletionRequest& request) override {
    std::lock_guard lock(mu_);
    requests.push_back(request);
    if (replies_.empty()) throw TransportError("no scripted reply", 1);
    std::string r = replies_.front();
    if (replies_.size() > 1) replies_.pop_front();
    if (r == "<transport-error>") throw TransportError("scripted failure", 3);
    return r;
  }
  std::vector<CompletionRequest> requests;

 private:
  std::mutex mu_;
  std::deque<std::string> replies_;
};

inline std::vector<Action> as_actions(const std::vector<Direction>& dirs) {
  std::vector<Action> out;
  for (auto d : dirs) out.push_back({d});
  return out;
}

inline std::vector<Action> as_actions(std::initializer_list<int> ids) {
  std::vector<Action> out;
  for (int id : ids) out.push_back({id});
  return out;
}

}  // namespace fixture
