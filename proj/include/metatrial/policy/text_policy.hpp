#pragma once

#include <string>
#include <vector>

#include "metatrial/core/error.hpp"
#include "metatrial/policy/backend.hpp"
#include "metatrial/policy/prompts.hpp"
#include "metatrial/policy/response_parser.hpp"

namespace metatrial {

inline constexpr int kDefaultMaxOutputTokens = 1024;

struct CompletionRequest {
  std::string system;
  std::string prompt;
  int max_output_tokens = kDefaultMaxOutputTokens;
  double temperature = 1.0;
  std::vector<std::string> stop;
};

/// One prompt in, one completion out. Throws TransportError once the
/// transport has given up.
class TextCompletionClient {
 public:
  virtual ~TextCompletionClient() = default;
  virtual std::string complete(const CompletionRequest& request) = 0;
};

struct TextPolicyOptions {
  int max_attempts = 3;  // queries per decision before MalformedResponse surfaces
  int max_output_tokens = kDefaultMaxOutputTokens;
  PromptOptions prompt;
};

/// Inference-only adapter: renders the standard and reflection prompts,
/// queries a completion client and parses the tagged reply.
class TextPolicy final : public PolicyBackend {
 public:
  TextPolicy(TextCompletionClient& client, TextPolicyOptions options = {}) : client_(client), options_(options) {}

  Turn act(const TurnContext& ctx, Rng&) const override {
    const PromptBundle prompt = render_action_prompt(ctx, options_.prompt);
    const int n = ctx.task.board_size;
    std::string last;
    for (int attempt = 0; attempt < options_.max_attempts; ++attempt) {
      last = client_.complete({prompt.system_text, prompt.user_text, options_.max_output_tokens, ctx.temperature, {}});
      try {
        const auto parsed = parse_tagged_response(last, ExpectedTag::Action, ctx.task.env_kind);
        Turn turn{{}, prompt.full_text()};
        for (const auto& a : parsed.actions) {
          if (const auto* d = std::get_if<Direction>(&a)) {
            turn.actions.push_back({*d});
          } else {
            const Cell c = std::get<Cell>(a);
            if (c.row < 1 || c.row > n || c.col < 1 || c.col > n)
              throw MalformedResponse("cell outside the board", last);
            turn.actions.push_back({(c.row - 1) * n + (c.col - 1)});
          }
        }
        return turn;
      } catch (const MalformedResponse&) {
        // query again
      }
    }
    throw MalformedResponse("no usable <action> block after " + std::to_string(options_.max_attempts) + " attempts",
                            last);
  }

  // A reply without a usable <remark> yields an empty reflection, so memory
  // keeps the raw trajectory for that episode instead.
  Reflection reflect(const ReflectContext& ctx, Rng&) const override {
    const PromptBundle prompt = render_reflection_prompt(ctx);
    Reflection r;
    r.episode = ctx.episode_index;
    r.prompt = prompt.full_text();
    for (int attempt = 0; attempt < options_.max_attempts; ++attempt) {
      try {
        const std::string reply =
            client_.complete({prompt.system_text, prompt.user_text, options_.max_output_tokens, ctx.temperature, {}});
        r.text = parse_tagged_response(reply, ExpectedTag::Remark, ctx.task.env_kind).remark;
        return r;
      } catch (const MalformedResponse&) {
      } catch (const TransportError&) {
        return r;
      }
    }
    return r;
  }

 private:
  TextCompletionClient& client_;
  TextPolicyOptions options_;
};

}  // namespace metatrial
