#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "futureyou/error.hpp"

namespace futureyou::llm {

enum class Role { user, assistant };

std::string_view to_string(Role r);

struct ChatTurn {
  Role role = Role::user;
  std::string text;

  bool operator==(const ChatTurn&) const = default;
};

inline constexpr double kChatTemperature = 0.7;
inline constexpr double kMemoryTemperature = 0.9;

struct CompletionRequest {
  std::string system_context;
  std::vector<ChatTurn> messages;  // alternating roles, or empty
  double temperature = kChatTemperature;
  int max_output_tokens = 512;

  // Throws InvalidRequest.
  void validate() const;
};

enum class FinishReason { stop, length, error };

std::string_view to_string(FinishReason r);

struct CompletionResult {
  std::string text;
  FinishReason finish_reason = FinishReason::stop;
  std::chrono::milliseconds latency{0};
};

struct BackendConfig {
  // "stub" or "openai" (any endpoint speaking the chat-completions shape).
  std::string provider = "stub";
  std::string endpoint_url;
  std::string model_name;
  // Name of the environment variable holding the key. Never the key itself.
  std::string api_key_env;
  std::chrono::milliseconds timeout{30000};
  int retries = 2;
  std::chrono::milliseconds backoff_base{250};

  void validate() const;
};

class InvalidRequest : public Error {
 public:
  using Error::Error;
};

class GatewayError : public Error {
 public:
  GatewayError(const std::string& what, int attempts)
      : Error(what + " (after " + std::to_string(attempts) + " attempt" + (attempts == 1 ? "" : "s") + ")"),
        attempts_(attempts) {}
  int attempts() const { return attempts_; }

 private:
  int attempts_;
};

class Timeout : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

class AuthFailure : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

class MalformedResponse : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

// Non-auth HTTP failure status (4xx, or 5xx/429 once retries run out).
class HttpStatusError : public GatewayError {
 public:
  HttpStatusError(int status, int attempts)
      : GatewayError("backend returned HTTP " + std::to_string(status), attempts), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

// A chat-completion service. Implementations are safe to share between
// threads.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual CompletionResult complete(const CompletionRequest& request) const = 0;
};

// Deterministic offline backend: echoes a digest-tagged copy of the last
// user message plus the first 40 code points of the system context.
CompletionResult stub_complete(const CompletionRequest& request);

class StubBackend final : public ChatBackend {
 public:
  CompletionResult complete(const CompletionRequest& request) const override { return stub_complete(request); }
};

class HttpBackend final : public ChatBackend {
 public:
  explicit HttpBackend(BackendConfig config);
  CompletionResult complete(const CompletionRequest& request) const override;

 private:
  BackendConfig config_;
  std::string base_url_;  // scheme://host[:port]
  std::string path_;
};

std::shared_ptr<const ChatBackend> make_backend(const BackendConfig& config);

// One-shot convenience: routes to the stub or the HTTP adapter per config.
CompletionResult complete(const BackendConfig& config, const CompletionRequest& request);

}  // namespace futureyou::llm
