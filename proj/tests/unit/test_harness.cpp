#include <catch_amalgamated.hpp>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "fixtures.hpp"
#include "metatrial/harness/cli.hpp"

using namespace metatrial;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("metatrial_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct CliResult {
  int status;
  std::string out;
  std::string err;
};

CliResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "metatrial");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int status = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {status, out.str(), err.str()};
}

const char* kSmallConfig = R"(schema_version: 1
root_seed: 4
checkpoint_every: 2
log_trajectories: true
environment:
  kind: minesweeper
  board_size: 4
  difficulty: 2
train:
  group_size: 4
  episodes_per_trial: 2
  batch_tasks: 2
  epochs: 4
  threads: 1
eval:
  tasks: 12
  seed: 3
  threads: 1
)";

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "run.yaml";
  std::ofstream(p) << text;
  return p;
}

// An OpenAI-style endpoint on an ephemeral port, served from a thread.
class MockServer {
 public:
  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;
  explicit MockServer(Handler h) {
    server_.Post("/v1/chat/completions", [this, h](const httplib::Request& req, httplib::Response& res) {
      ++hits;
      {
        std::lock_guard lock(mu_);
        bodies.push_back(req.body);
        auth.push_back(req.get_header_value("Authorization"));
      }
      h(req, res);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~MockServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

  std::atomic<int> hits{0};
  std::vector<std::string> bodies;
  std::vector<std::string> auth;

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::mutex mu_;
};

void reply_with(httplib::Response& res, const std::string& content) {
  res.set_content(nlohmann::json{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}}.dump(),
                  "application/json");
}

LlmSettings local_settings(const MockServer& server) {
  LlmSettings s;
  s.base_url = server.url();
  s.model = "test-model";
  s.api_key_env = "";
  s.timeout_seconds = 5;
  return s;
}

CompletionRequest request() {
  CompletionRequest r;
  r.system = "s";
  r.prompt = "p";
  return r;
}

const RetryPolicy kFastRetry{2, std::chrono::milliseconds(1), 2.0, std::chrono::milliseconds(4)};

RunConfig random_config(Rng& rng) {
  RunConfig c;
  c.output_dir = "runs/out dir: #" + std::to_string(rng.below(1000)) + " \"q\"";
  c.root_seed = rng();
  c.backend = rng.below(2) ? Backend::Parametric : Backend::Llm;
  c.log_trajectories = rng.below(2);
  c.checkpoint_every = static_cast<int>(rng.below(50));
  c.matched_rl = rng.below(2);
  const bool sokoban = rng.below(2);
  c.environment = make_task(sokoban ? EnvKind::Sokoban : EnvKind::MineSweeper, 6 + int(rng.below(3)),
                            1 + int(rng.below(3)), 0);
  c.environment.max_steps = 1 + int(rng.below(100));
  if (sokoban) c.environment.interior_walls = int(rng.below(3));
  auto& t = c.train;
  t.mode = rng.below(2) ? TrainMode::RL : TrainMode::MetaRL;
  t.group_size = 2 + int(rng.below(30));
  t.episodes_per_trial = 1 + int(rng.below(5));
  t.discount = {rng.uniform(), rng.uniform()};
  t.estimator = static_cast<Estimator>(rng.below(4));
  t.learning_rate = 1e-6 + rng.uniform();
  t.grad_clip = rng.uniform() * 20;
  t.momentum = rng.uniform() * 0.99;
  t.batch_tasks = 1 + int(rng.below(64));
  t.epochs = 1 + int(rng.below(1000));
  t.rollout_temperature = 0.01 + rng.uniform() * 2;
  t.memory_mode = static_cast<MemoryMode>(rng.below(4));
  t.threads = static_cast<unsigned>(rng.below(16));
  auto& e = c.eval;
  e.options.k_max = 1 + int(rng.below(8));
  e.options.protocol = rng.below(2) ? Protocol::Independent : Protocol::SequentialWithMemory;
  e.options.memory_mode = static_cast<MemoryMode>(rng.below(4));
  e.options.temperature = 0.05 + rng.uniform();
  if (rng.below(2)) e.options.reflection_temperature = 0.05 + rng.uniform();
  e.options.seed = rng();
  e.options.threads = static_cast<unsigned>(rng.below(8));
  e.tasks = 1 + int(rng.below(512));
  e.diversity_samples = 2 + int(rng.below(30));
  for (int v = int(rng.below(4)); v < 8; v += 1 + int(rng.below(3))) e.sweep_axis.push_back(v);
  auto& l = c.llm;
  l.base_url = "http://host-" + std::to_string(rng.below(99)) + ":8000/v1";
  l.model = rng.below(2) ? "" : "model/" + std::to_string(rng.below(9));
  l.api_key_env = rng.below(2) ? "" : "KEY_" + std::to_string(rng.below(9));
  l.max_output_tokens = 1 + int(rng.below(4096));
  l.timeout_seconds = 0.5 + rng.uniform() * 100;
  l.retries = int(rng.below(6));
  l.max_attempts = 1 + int(rng.below(5));
  l.max_concurrency = 1 + int(rng.below(16));
  l.num_actions_per_turn = 1 + int(rng.below(4));
  return c;
}

}  // namespace

TEST_CASE("run configs round-trip through their text form") {
  Rng rng(2026);
  for (int i = 0; i < 300; ++i) {
    const RunConfig c = random_config(rng);
    const std::string text = serialize_run_config(c);
    INFO(text);
    REQUIRE(parse_run_config(text) == c);
  }
  CHECK(parse_run_config(serialize_run_config(RunConfig{})) == RunConfig{});
}

TEST_CASE("the shipped config parses") {
  const RunConfig c = load_run_config(METATRIAL_SOURCE_DIR "/configs/ms6.yaml");
  CHECK(c.environment == make_task(EnvKind::MineSweeper, 6, 3, 0));
  CHECK(c.train.group_size == 8);
  CHECK(c.train.episodes_per_trial == 3);
  CHECK(c.train.discount.gamma_traj == 0.6);
  CHECK(c.matched_rl);
  CHECK(c.eval.sweep_axis == std::vector<int>{3, 4, 5, 6});
}

TEST_CASE("config diagnostics name the line, the field and the valid range") {
  auto error_of = [](const std::string& text) {
    try {
      parse_run_config(text);
    } catch (const ConfigError& e) {
      return std::pair{std::string(e.what()), e.line()};
    }
    return std::pair{std::string(), 0};
  };
  auto [msg, line] = error_of("schema_version: 1\ntrain:\n  gamma_traj: 1.5\n");
  CHECK(msg == "line 3: train.gamma_traj = 1.5 is outside the valid range [0, 1]");
  CHECK(line == 3);
  std::tie(msg, line) = error_of("schema_version: 1\nbogus: 2\n");
  CHECK(msg == "line 2: unknown key 'bogus'");
  std::tie(msg, line) = error_of("schema_version: 1\neval:\n  k: 3\n  protocl: sequential\n");
  CHECK(msg == "line 4: unknown key 'eval.protocl'");
  std::tie(msg, line) = error_of("schema_version: 1\ntrain:\n  group_size: many\n");
  CHECK(msg == "line 3: train.group_size has the wrong type");
  std::tie(msg, line) = error_of("schema_version: 1\ntrain:\n  estimator: ppo\n");
  CHECK(line == 3);
  std::tie(msg, line) = error_of("schema_version: 1\neval:\n  sweep_axis: [4, 3]\n");
  CHECK(msg == "line 3: eval.sweep_axis must be strictly increasing");
  std::tie(msg, line) = error_of("schema_version: 2\n");
  CHECK(line == 1);
  std::tie(msg, line) = error_of("output_dir: x\n");
  CHECK(msg.find("schema_version must be 1") != std::string::npos);
  std::tie(msg, line) = error_of("schema_version: 1\nenvironment:\n  kind: sokoban\n  board_size: 5\n  difficulty: 9\n");
  CHECK(msg.find("difficulty exceeds board capacity") != std::string::npos);
  std::tie(msg, line) = error_of("schema_version: 1\ntrain: [1, 2\n");
  CHECK(line >= 2);
  CHECK_THROWS_AS(load_run_config("/nonexistent/run.yaml"), ConfigError);
}

TEST_CASE("checkpoints round-trip exactly") {
  TrainConfig c;
  c.group_size = 3;
  c.batch_tasks = 2;
  c.epochs = 3;
  c.momentum = 0.9;
  c.threads = 1;
  const auto shape = make_task(EnvKind::Sokoban, 6, 1, 0);
  const Checkpoint cp = train(c, shape, 12);
  const fs::path dir = scratch("checkpoint");
  save_checkpoint(cp, dir / "nested" / "cp.json");
  const Checkpoint back = load_checkpoint(dir / "nested" / "cp.json");
  CHECK(back == cp);
  CHECK(checkpoint_from_json(to_json(cp)) == cp);

  auto j = to_json(cp);
  j["params"]["theta"].erase(0);
  CHECK_THROWS_WITH(checkpoint_from_json(j), Catch::Matchers::ContainsSubstring("theta has"));
  j = to_json(cp);
  j["format_version"] = 99;
  CHECK_THROWS_WITH(checkpoint_from_json(j), Catch::Matchers::ContainsSubstring("newer than supported"));
  CHECK_THROWS_WITH(load_checkpoint(dir / "missing.json"), Catch::Matchers::ContainsSubstring("checkpoint not found"));
  std::ofstream(dir / "bad.json") << "{ not json";
  CHECK_THROWS_WITH(load_checkpoint(dir / "bad.json"), Catch::Matchers::ContainsSubstring("malformed checkpoint"));
}

TEST_CASE("trajectory logs carry a header and one object per step") {
  const GridEnvironment env(make_task(EnvKind::Sokoban, 6, 2, 7));
  const fixture::ScriptedPolicy policy(fixture::as_actions({kUp, kLeft}));
  const Trial trial = run_trial(env, policy, {2, MemoryMode::Both, 1.0, {}}, 3);
  std::ostringstream out;
  TrajectoryWriter writer(out);
  writer.write(trial, "0-0-0");
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(nlohmann::json::parse(line) == nlohmann::json{{"schema", "metatrial.trajectory"}, {"version", 1}});
  std::vector<nlohmann::json> steps;
  while (std::getline(in, line)) steps.push_back(nlohmann::json::parse(line));
  std::size_t expected = 0;
  for (const auto& e : trial.episodes) expected += e.steps.size();
  REQUIRE(steps.size() == expected);
  for (const auto& s : steps)
    for (const char* key : {"trial_id", "episode", "step", "obs_text", "action", "reward", "done", "success"})
      CHECK(s.contains(key));
  CHECK(steps[0]["action"] == "up");
  CHECK(steps[0]["obs_text"] == env.observe(env.reset()).text());
  CHECK(steps[2]["action"].is_null());  // the script ran out
  CHECK(steps[2]["done"] == true);
}

TEST_CASE("experience JSONL follows the record schema") {
  ExperienceRecord r{"1-2-3", 1, 4, RecordKind::Reflection, std::string("prompt"), "plan", -0.5, 2.25};
  const auto j = to_json(r);
  CHECK(j == nlohmann::json{{"trial_id", "1-2-3"}, {"episode", 1},  {"step", 4},       {"kind", "reflection"},
                            {"context", "prompt"}, {"action", "plan"}, {"advantage", -0.5}, {"G", 2.25}});
  r.context = std::vector<double>{0.5, 1.0};
  CHECK(to_json(r)["context"] == nlohmann::json::array({0.5, 1.0}));
  std::ostringstream out;
  JsonlExperienceSink sink(out);
  sink.write(r);
  CHECK(out.str().rfind("{\"schema\":\"metatrial.experience\",\"version\":1}\n", 0) == 0);
}

TEST_CASE("base URLs split into host and path prefix") {
  auto e = split_base_url("http://127.0.0.1:8000/v1/");
  CHECK(e.scheme_host_port == "http://127.0.0.1:8000");
  CHECK(e.path_prefix == "/v1");
  CHECK(split_base_url("http://example.com").path_prefix.empty());
  CHECK_THROWS_AS(split_base_url("127.0.0.1:8000"), std::invalid_argument);
  CHECK_THROWS_AS(split_base_url("ftp://host/v1"), std::invalid_argument);
}

TEST_CASE("a mock endpoint drives the text policy end to end") {
  MockServer server([](const httplib::Request&, httplib::Response& res) { reply_with(res, "<action>up</action>"); });
  ::setenv("METATRIAL_TEST_KEY", "sk-test", 1);
  auto settings = local_settings(server);
  settings.api_key_env = "METATRIAL_TEST_KEY";
  HttpCompletionClient client(settings, kFastRetry);
  const TextPolicy policy(client);
  const GridEnvironment env(make_task(EnvKind::Sokoban, 6, 2, 7));
  const auto initial = env.observe(env.reset());
  const MemoryState memory;
  Rng rng(0);
  const auto turn = policy.act(TurnContext{env.task(), initial, initial, {}, memory, 0, 0.7}, rng);
  CHECK(turn.actions == fixture::as_actions({kUp}));
  REQUIRE(server.bodies.size() == 1);
  const auto body = nlohmann::json::parse(server.bodies[0]);
  CHECK(body["model"] == "test-model");
  CHECK(body["max_tokens"] == 1024);
  CHECK(body["temperature"] == 0.7);
  CHECK(body["messages"][0]["role"] == "system");
  CHECK(body["messages"][1]["content"].get<std::string>().find("within <action> </action> tags") != std::string::npos);
  CHECK(server.auth[0] == "Bearer sk-test");
}

TEST_CASE("server errors are retried and then surface with the attempt count") {
  MockServer server([](const httplib::Request&, httplib::Response& res) { res.status = 503; });
  HttpCompletionClient client(local_settings(server), kFastRetry);
  try {
    client.complete(request());
    FAIL("expected TransportError");
  } catch (const TransportError& e) {
    CHECK(e.attempts() == 3);
    CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring("HTTP 503"));
  }
  CHECK(server.hits == 3);
}

TEST_CASE("client errors fail without retrying") {
  MockServer server([](const httplib::Request&, httplib::Response& res) {
    res.status = 401;
    res.set_content("bad key", "text/plain");
  });
  HttpCompletionClient client(local_settings(server), kFastRetry);
  try {
    client.complete(request());
    FAIL("expected TransportError");
  } catch (const TransportError& e) {
    CHECK(e.attempts() == 1);
  }
  CHECK(server.hits == 1);
}

TEST_CASE("timeouts become transport errors") {
  MockServer server([](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(800));
    reply_with(res, "<action>up</action>");
  });
  auto settings = local_settings(server);
  settings.timeout_seconds = 0.1;
  HttpCompletionClient client(settings, RetryPolicy{1, std::chrono::milliseconds(1), 2.0, std::chrono::milliseconds(1)});
  try {
    client.complete(request());
    FAIL("expected TransportError");
  } catch (const TransportError& e) {
    CHECK(e.attempts() == 2);
  }
}

TEST_CASE("malformed completions surface to the rollout as a failed step") {
  MockServer server([](const httplib::Request&, httplib::Response& res) { reply_with(res, "I am not sure."); });
  HttpCompletionClient client(local_settings(server), kFastRetry);
  const TextPolicy policy(client);
  const GridEnvironment env(make_task(EnvKind::MineSweeper, 4, 2, 7));
  Rng rng(0);
  const Episode ep = run_episode(env, policy, MemoryState{}, 0, 1.0, rng);
  REQUIRE(ep.steps.size() == 1);
  CHECK_FALSE(ep.steps[0].action.has_value());
  CHECK(server.hits == 3);
}

TEST_CASE("in-flight requests respect the concurrency limit") {
  std::atomic<int> in_flight{0}, peak{0};
  MockServer server([&](const httplib::Request&, httplib::Response& res) {
    const int now = ++in_flight;
    int seen = peak.load();
    while (now > seen && !peak.compare_exchange_weak(seen, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(30));
    --in_flight;
    reply_with(res, "ok");
  });
  auto settings = local_settings(server);
  settings.max_concurrency = 1;
  HttpCompletionClient client(settings, kFastRetry);
  std::vector<std::thread> callers;
  for (int i = 0; i < 4; ++i) callers.emplace_back([&] { client.complete(request()); });
  for (auto& t : callers) t.join();
  CHECK(server.hits == 4);
  CHECK(peak == 1);
}

TEST_CASE("a missing API key variable is reported up front") {
  LlmSettings s;
  s.api_key_env = "METATRIAL_SURELY_UNSET_VARIABLE";
  ::unsetenv(s.api_key_env.c_str());
  CHECK_THROWS_WITH(HttpCompletionClient(s), Catch::Matchers::ContainsSubstring("METATRIAL_SURELY_UNSET_VARIABLE"));
}

TEST_CASE("train writes its artifacts and re-runs byte-identically") {
  const fs::path dir = scratch("train");
  const auto config = write_config(dir, kSmallConfig).string();
  const auto a = run_cli({"train", "--config", config, "--output", (dir / "a").string()});
  REQUIRE(a.status == 0);
  INFO(a.err);
  for (const char* f : {"config.yaml", "metrics.csv", "trajectories.jsonl", "checkpoint.json", "manifest.json",
                        "checkpoints/epoch_00002.json", "checkpoints/epoch_00004.json"})
    CHECK(fs::exists(dir / "a" / f));
  const auto metrics = lines_of(dir / "a" / "metrics.csv");
  CHECK(metrics.size() == 5);
  CHECK(metrics[0] == "epoch,mean_objective,success_rate,mean_episodes,grad_norm,episodes");

  REQUIRE(run_cli({"train", "--config", config, "--output", (dir / "b").string()}).status == 0);
  for (const char* f : {"metrics.csv", "trajectories.jsonl", "checkpoint.json"})
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  REQUIRE(run_cli({"train", "--config", config, "--output", (dir / "a").string()}).status == 0);
  CHECK(slurp(dir / "a" / "metrics.csv") == slurp(dir / "b" / "metrics.csv"));

  // Saved config.yaml reproduces the run.
  const auto saved = load_run_config((dir / "a" / "config.yaml").string());
  CHECK(saved.train.epochs == 4);
  CHECK(saved.root_seed == 4);
}

TEST_CASE("resuming from a mid-run checkpoint reproduces the remaining epochs") {
  const fs::path dir = scratch("resume");
  const auto config = write_config(dir, kSmallConfig).string();
  REQUIRE(run_cli({"train", "--config", config, "--output", (dir / "full").string()}).status == 0);
  const auto r = run_cli({"train", "--resume", (dir / "full" / "checkpoints" / "epoch_00002.json").string(), "--output",
                          (dir / "resumed").string()});
  REQUIRE(r.status == 0);
  CHECK(slurp(dir / "full" / "checkpoint.json") == slurp(dir / "resumed" / "checkpoint.json"));
  const auto full = lines_of(dir / "full" / "metrics.csv");
  const auto tail = lines_of(dir / "resumed" / "metrics.csv");
  REQUIRE(tail.size() == 3);
  CHECK(tail[1] == full[3]);
  CHECK(tail[2] == full[4]);
}

TEST_CASE("matched-RL training writes the twin run alongside") {
  const fs::path dir = scratch("matched");
  const auto config = write_config(dir, kSmallConfig).string();
  const auto r = run_cli({"train", "--config", config, "--output", dir.string(), "--matched-rl", "--epochs", "1"});
  REQUIRE(r.status == 0);
  const auto twin = load_checkpoint(dir / "matched_rl" / "checkpoint.json");
  CHECK(twin.config.mode == TrainMode::RL);
  CHECK(twin.config.group_size == 8);
  const auto meta = load_checkpoint(dir / "checkpoint.json");
  CHECK(meta.config.group_size == 4);
  CHECK(meta.config.episodes_per_trial == 2);
  CHECK(run_cli({"train", "--config", config, "--output", dir.string(), "--matched-rl", "--mode", "rl"}).status == 2);
}

TEST_CASE("eval subcommands write their reports") {
  const fs::path dir = scratch("eval");
  const auto config = write_config(dir, kSmallConfig).string();
  REQUIRE(run_cli({"train", "--config", config, "--output", dir.string(), "--epochs", "2"}).status == 0);
  const auto cp = (dir / "checkpoint.json").string();

  const auto p = run_cli({"eval", "passk", "--config", config, "--checkpoint", cp, "--output", dir.string(), "--k", "3",
                         "--protocol", "sequential"});
  REQUIRE(p.status == 0);
  CHECK(p.out.find("sequential protocol, 12 tasks: pass@1") != std::string::npos);
  const auto csv = lines_of(dir / "passk.csv");
  CHECK(csv[0] == "task,seed,protocol,k,solved,episodes");
  CHECK(csv.size() == 1 + 12 * 3);
  const auto summary = nlohmann::json::parse(slurp(dir / "passk.json"));
  CHECK(summary["task_count"] == 12);
  CHECK(summary["rates"].contains("pass@3"));

  REQUIRE(run_cli({"eval", "diversity", "--config", config, "--checkpoint", cp, "--output", dir.string(), "--samples", "8"}).status == 0);
  CHECK(lines_of(dir / "diversity.csv")[0] == "task,seed,samples,distinct,entropy");

  const auto s = run_cli({"eval", "sweep", "--config", config, "--checkpoint", cp, "--axis", "1,2,3", "--output", (dir / "sw").string()});
  REQUIRE(s.status == 0);
  const auto sweep = lines_of(dir / "sw" / "sweep.csv");
  CHECK(sweep[0] == "difficulty,task,seed,protocol,k,solved,episodes");
  CHECK(sweep.size() == 1 + 3 * 12 * 3);
  CHECK(nlohmann::json::parse(slurp(dir / "sw" / "sweep.json"))["rows"].size() == 3);

  // Same seed, same report.
  const auto first = slurp(dir / "passk.csv");
  REQUIRE(run_cli({"eval", "passk", "--config", config, "--checkpoint", cp, "--output", dir.string(), "--k", "3",
                         "--protocol", "sequential"}).status == 0);
  CHECK(slurp(dir / "passk.csv") == first);
}

TEST_CASE("export writes advantage-annotated JSONL") {
  const fs::path dir = scratch("export");
  const auto config = write_config(dir, kSmallConfig).string();
  REQUIRE(run_cli({"train", "--config", config, "--output", dir.string(), "--epochs", "1"}).status == 0);
  const auto r = run_cli({"export", "--checkpoint", (dir / "checkpoint.json").string(), "--output",
                          (dir / "exp.jsonl").string()});
  REQUIRE(r.status == 0);
  const auto lines = lines_of(dir / "exp.jsonl");
  REQUIRE(lines.size() > 1);
  CHECK(r.out.rfind(std::to_string(lines.size() - 1) + " experience records", 0) == 0);
  const auto rec = nlohmann::json::parse(lines[1]);
  CHECK(rec["kind"] == "action");
  CHECK(rec["context"].is_array());
}

TEST_CASE("CLI failures map to exit statuses") {
  const fs::path dir = scratch("errors");
  auto r = run_cli({"eval", "passk", "--checkpoint", (dir / "nope.json").string()});
  CHECK(r.status == 1);
  CHECK(r.err.find("checkpoint not found") != std::string::npos);

  const auto bad = write_config(dir, "schema_version: 1\ntrain:\n  gamma_traj: 1.5\n").string();
  r = run_cli({"train", "--config", bad});
  CHECK(r.status == 2);
  CHECK(r.err.find("line 3: train.gamma_traj = 1.5 is outside the valid range [0, 1]") != std::string::npos);

  CHECK(run_cli({"eval", "passk"}).status == 1);
  CHECK(run_cli({"frobnicate"}).status != 0);
  CHECK(run_cli({"eval", "passk", "--protocol", "parallel"}).status != 0);
}

TEST_CASE("the installed binary runs") {
  CHECK(std::system((std::string("\"") + METATRIAL_CLI_PATH + "\" --help > /dev/null").c_str()) == 0);
  CHECK(std::system((std::string("\"") + METATRIAL_CLI_PATH + "\" eval passk --checkpoint /nonexistent.json 2> /dev/null").c_str()) != 0);
}
