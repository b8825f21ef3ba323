#pragma once

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <regex>
#include <semaphore>
#include <stdexcept>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "metatrial/core/error.hpp"
#include "metatrial/harness/run_config.hpp"
#include "metatrial/policy/text_policy.hpp"

namespace metatrial {

struct Endpoint {
  std::string scheme_host_port;  // "http://host:port"
  std::string path_prefix;       // "/v1", or empty
};

inline Endpoint split_base_url(const std::string& url) {
  static const std::regex re(R"(^(https?)://([^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) throw std::invalid_argument("malformed base_url '" + url + "'");
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (m[1] == "https") throw std::invalid_argument("https base_url needs a build with OpenSSL support");
#endif
  std::string prefix = m[3].matched ? m[3].str() : std::string();
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {m[1].str() + "://" + m[2].str(), prefix};
}

struct RetryPolicy {
  int retries = 3;  // after the first attempt
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
  std::chrono::milliseconds max_backoff{8000};
};

/// OpenAI-compatible chat-completions client. Connection failures, timeouts,
/// 429 and 5xx are retried with exponential backoff; other statuses fail
/// at once. At most `max_concurrency` requests are in flight.
class HttpCompletionClient final : public TextCompletionClient {
 public:
  HttpCompletionClient(const LlmSettings& settings, RetryPolicy retry)
      : settings_(settings),
        endpoint_(split_base_url(settings.base_url)),
        retry_(retry),
        slots_(settings.max_concurrency) {
    if (!settings_.api_key_env.empty()) {
      const char* key = std::getenv(settings_.api_key_env.c_str());
      if (key == nullptr || *key == '\0')
        throw std::runtime_error("environment variable " + settings_.api_key_env + " is not set");
      api_key_ = key;
    }
  }

  explicit HttpCompletionClient(const LlmSettings& settings)
      : HttpCompletionClient(settings, RetryPolicy{settings.retries}) {}

  std::string complete(const CompletionRequest& request) override {
    nlohmann::json body{{"model", settings_.model},
                        {"messages",
                         {{{"role", "system"}, {"content", request.system}},
                          {{"role", "user"}, {"content", request.prompt}}}},
                        {"max_tokens", request.max_output_tokens},
                        {"temperature", request.temperature}};
    if (!request.stop.empty()) body["stop"] = request.stop;
    const std::string payload = body.dump();

    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    slots_.acquire();
    struct Release {
      std::counting_semaphore<>& s;
      ~Release() { s.release(); }
    } release{slots_};

    auto backoff = retry_.initial_backoff;
    std::string last_error;
    const int attempts = retry_.retries + 1;
    for (int attempt = 1; attempt <= attempts; ++attempt) {
      httplib::Client cli(endpoint_.scheme_host_port);
      const auto timeout = std::chrono::duration<double>(settings_.timeout_seconds);
      cli.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
      cli.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
      cli.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));

      auto res = cli.Post(endpoint_.path_prefix + "/chat/completions", headers, payload, "application/json");
      if (!res) {
        last_error = httplib::to_string(res.error());
      } else if (res->status == 200) {
        try {
          const auto j = nlohmann::json::parse(res->body);
          return j.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
          last_error = std::string("unreadable response body: ") + e.what();
        }
      } else if (res->status == 429 || res->status >= 500) {
        last_error = "HTTP " + std::to_string(res->status);
      } else {
        throw TransportError("HTTP " + std::to_string(res->status) + ": " + res->body, attempt);
      }
      if (attempt < attempts) {
        std::this_thread::sleep_for(backoff);
        backoff = std::min(retry_.max_backoff, std::chrono::duration_cast<std::chrono::milliseconds>(
                                                   backoff * retry_.multiplier));
      }
    }
    throw TransportError("completion request failed: " + last_error, attempts);
  }

 private:
  LlmSettings settings_;
  Endpoint endpoint_;
  RetryPolicy retry_;
  std::string api_key_;
  std::counting_semaphore<> slots_;
};

}  // namespace metatrial
