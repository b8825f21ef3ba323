#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace metatrial {

// An action outside the admissible set, or a step on a finished episode.
class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A text response that does not carry the expected tagged block.
class MalformedResponse : public std::runtime_error {
 public:
  MalformedResponse(const std::string& what, std::string text)
      : std::runtime_error(what), text_(std::move(text)) {}
  const std::string& text() const noexcept { return text_; }

 private:
  std::string text_;
};

class TransportError : public std::runtime_error {
 public:
  TransportError(const std::string& what, int attempts)
      : std::runtime_error(what + " (after " + std::to_string(attempts) + " attempts)"),
        attempts_(attempts) {}
  int attempts() const noexcept { return attempts_; }

 private:
  int attempts_;
};

// A policy backend could not produce a usable action; the rollout engine
// turns this into a failed step.
class PolicyFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A prompt template placeholder without a value.
class TemplateError : public std::invalid_argument {
 public:
  explicit TemplateError(std::string placeholder)
      : std::invalid_argument("no value for placeholder {" + placeholder + "}"), placeholder_(std::move(placeholder)) {}
  const std::string& placeholder() const noexcept { return placeholder_; }

 private:
  std::string placeholder_;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = -1)
      : std::runtime_error(line >= 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

class SinkError : public std::runtime_error {
 public:
  SinkError(const std::string& what, std::size_t written)
      : std::runtime_error(what + " (" + std::to_string(written) + " records written)"),
        written_(written) {}
  std::size_t written() const noexcept { return written_; }

 private:
  std::size_t written_;
};

}  // namespace metatrial
