#include "futureyou/llm_gateway.hpp"

#include <cstdlib>
#include <future>
#include <optional>
#include <thread>

#include "futureyou/strings.hpp"
#include "httplib.h"
#include "json.hpp"

namespace futureyou::llm {
namespace {

constexpr std::size_t kStubContextChars = 40;

struct Attempt {
  enum class Kind { ok, transport, retryable_status, auth, status, malformed } kind = Kind::ok;
  int status = 0;
  std::string detail;
  CompletionResult result;
};

nlohmann::json request_body(const std::string& model, const CompletionRequest& request) {
  nlohmann::json messages = nlohmann::json::array();
  if (!request.system_context.empty()) {
    messages.push_back({{"role", "system"}, {"content", request.system_context}});
  }
  for (const auto& m : request.messages) {
    messages.push_back({{"role", to_string(m.role)}, {"content", m.text}});
  }
  return {{"model", model},
          {"messages", messages},
          {"temperature", request.temperature},
          {"max_tokens", request.max_output_tokens}};
}

Attempt parse_response(const std::string& body) {
  Attempt a;
  auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded()) return {Attempt::Kind::malformed, 0, "response is not JSON", {}};
  try {
    const auto& choice = j.at("choices").at(0);
    const auto& content = choice.at("message").at("content");
    if (!content.is_string()) return {Attempt::Kind::malformed, 0, "message content is not text", {}};
    a.result.text = content.get<std::string>();
    std::string reason = choice.value("finish_reason", "stop");
    if (reason == "length") {
      a.result.finish_reason = FinishReason::length;
    } else if (reason == "stop") {
      a.result.finish_reason = FinishReason::stop;
    } else {
      a.result.finish_reason = FinishReason::error;
    }
  } catch (const nlohmann::json::exception&) {
    return {Attempt::Kind::malformed, 0, "response lacks choices[0].message.content", {}};
  }
  if (a.result.finish_reason == FinishReason::stop && a.result.text.empty()) {
    return {Attempt::Kind::malformed, 0, "empty completion text", {}};
  }
  return a;
}

}  // namespace

std::string_view to_string(Role r) { return r == Role::user ? "user" : "assistant"; }

std::string_view to_string(FinishReason r) {
  switch (r) {
    case FinishReason::stop:
      return "stop";
    case FinishReason::length:
      return "length";
    case FinishReason::error:
      return "error";
  }
  return "error";
}

void CompletionRequest::validate() const {
  if (max_output_tokens <= 0) throw InvalidRequest("max_output_tokens must be positive");
  if (!(temperature >= 0.0 && temperature <= 2.0)) throw InvalidRequest("temperature must lie in [0, 2]");
  for (std::size_t i = 1; i < messages.size(); ++i) {
    if (messages[i].role == messages[i - 1].role) throw InvalidRequest("message roles must alternate");
  }
}

void BackendConfig::validate() const {
  if (timeout.count() <= 0) throw InvalidRequest("backend timeout must be positive");
  if (retries < 0) throw InvalidRequest("backend retries must be non-negative");
  if (provider != "stub" && provider != "openai") throw InvalidRequest("unknown backend provider '" + provider + "'");
  if (provider != "stub" && endpoint_url.empty()) throw InvalidRequest("backend endpoint_url is required");
}

CompletionResult stub_complete(const CompletionRequest& request) {
  const ChatTurn* last_user = nullptr;
  for (auto it = request.messages.rbegin(); it != request.messages.rend(); ++it) {
    if (it->role == Role::user) {
      last_user = &*it;
      break;
    }
  }
  std::string_view context = utf8_prefix(request.system_context, kStubContextChars);
  std::string text;
  if (last_user != nullptr) {
    text = "[stub " + hex64(fnv1a64(last_user->text)).substr(0, 8) + "] " + last_user->text + " | context: ";
  } else {
    text = "[stub " + hex64(fnv1a64(request.system_context)).substr(0, 8) + "] context: ";
  }
  text += context;
  return {std::move(text), FinishReason::stop, std::chrono::milliseconds{0}};
}

HttpBackend::HttpBackend(BackendConfig config) : config_(std::move(config)) {
  config_.validate();
  const std::string& url = config_.endpoint_url;
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw InvalidRequest("endpoint_url needs a scheme: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  base_url_ = url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
}

CompletionResult HttpBackend::complete(const CompletionRequest& request) const {
  request.validate();

  httplib::Headers headers;
  if (!config_.api_key_env.empty()) {
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw AuthFailure("environment variable " + config_.api_key_env + " is not set", 0);
    }
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  const std::string body = request_body(config_.model_name, request).dump();

  const int max_attempts = config_.retries + 1;
  Attempt last;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    const auto started = std::chrono::steady_clock::now();
    auto client = std::make_shared<httplib::Client>(base_url_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
    client->set_connection_timeout(secs.count(), usecs.count());
    client->set_read_timeout(secs.count(), usecs.count());
    client->set_write_timeout(secs.count(), usecs.count());

    // The attempt runs on its own thread so the whole exchange, not just
    // each socket operation, is bounded by the timeout.
    auto pending = std::async(std::launch::async, [client, this, &headers, &body]() -> Attempt {
      auto res = client->Post(path_, headers, body, "application/json");
      if (!res) return {Attempt::Kind::transport, 0, httplib::to_string(res.error()), {}};
      const int status = res->status;
      if (status == 401 || status == 403) return {Attempt::Kind::auth, status, "", {}};
      if (status == 429 || status >= 500) return {Attempt::Kind::retryable_status, status, "", {}};
      if (status < 200 || status >= 300) return {Attempt::Kind::status, status, "", {}};
      return parse_response(res->body);
    });
    if (pending.wait_for(config_.timeout) == std::future_status::timeout) {
      client->stop();
      pending.wait();
      last = {Attempt::Kind::transport, 0, "request exceeded timeout", {}};
    } else {
      last = pending.get();
    }

    switch (last.kind) {
      case Attempt::Kind::ok:
        last.result.latency =
            std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);
        return last.result;
      case Attempt::Kind::auth:
        throw AuthFailure("backend rejected credentials (HTTP " + std::to_string(last.status) + ")", attempt);
      case Attempt::Kind::status:
        throw HttpStatusError(last.status, attempt);
      case Attempt::Kind::malformed:
        throw MalformedResponse("malformed backend response: " + last.detail, attempt);
      case Attempt::Kind::transport:
      case Attempt::Kind::retryable_status:
        break;
    }
    if (attempt < max_attempts) std::this_thread::sleep_for(config_.backoff_base * (1 << (attempt - 1)));
  }
  if (last.kind == Attempt::Kind::retryable_status) throw HttpStatusError(last.status, max_attempts);
  throw Timeout("backend unreachable at " + config_.endpoint_url + ": " + last.detail, max_attempts);
}

std::shared_ptr<const ChatBackend> make_backend(const BackendConfig& config) {
  config.validate();
  if (config.provider == "stub") return std::make_shared<StubBackend>();
  return std::make_shared<HttpBackend>(config);
}

CompletionResult complete(const BackendConfig& config, const CompletionRequest& request) {
  config.validate();
  request.validate();
  return make_backend(config)->complete(request);
}

}  // namespace futureyou::llm
