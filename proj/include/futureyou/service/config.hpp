#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "futureyou/error.hpp"
#include "futureyou/llm_gateway.hpp"
#include "futureyou/service/service.hpp"

namespace futureyou::service {

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path data_dir = "var/futureyou";
  bool fsync = true;
  // Static files served under / (the participant web client). Optional.
  std::filesystem::path web_root;
};

// Content files overriding the built-in defaults. Empty means built-in.
struct ContentConfig {
  std::filesystem::path question_schema;
  std::filesystem::path probing_topics;
  std::filesystem::path instruments;
};

struct ServiceConfig {
  ServerConfig server;
  llm::BackendConfig backend;
  ServiceOptions options;
  ContentConfig content;
  // Lets POST /sessions pick the condition (test deployments only).
  bool allow_condition_override = false;
};

// INI sections: server, backend, aging, experiment, chat, memory, content.
// Unknown sections or keys are rejected, and so is any literal API key:
// keys are only ever read from the variable named by backend.api_key_env.
ServiceConfig parse_config(std::string_view ini_text);
ServiceConfig load_config(const std::filesystem::path& path);

}  // namespace futureyou::service
