#pragma once

#include <exception>
#include <memory>
#include <optional>
#include <string>

#include "futureyou/life_story.hpp"
#include "futureyou/measures.hpp"
#include "futureyou/memory_engine.hpp"
#include "futureyou/service/config.hpp"
#include "futureyou/service/service.hpp"
#include "httplib.h"

namespace futureyou::service {

struct HttpError {
  int status = 500;
  std::string code;  // machine-readable, e.g. "wrong_stage"
  std::string message;
};

// Maps a failure to its HTTP status; body is {"error": code, "message": ...}.
HttpError classify(const std::exception& e);

struct RouteOptions {
  bool allow_condition_override = false;
};

// Registers the JSON API on `server`. `service` must outlive it.
void install_routes(httplib::Server& server, Service& service, const RouteOptions& options = {});

// Everything a running service owns: content files, stores, backend.
class Runtime {
 public:
  explicit Runtime(const ServiceConfig& config, Clock clock = system_clock());

  Service& service() { return *service_; }
  const ServiceConfig& config() const { return config_; }

 private:
  ServiceConfig config_;
  std::optional<life_story::QuestionSchema> schema_;
  std::optional<memory::ProbingCatalog> catalog_;
  std::optional<measures::Instrument> instrument_;
  std::unique_ptr<Service> service_;
};

// Recovers state from the data directory, then serves until stopped.
// Returns false when the port cannot be bound.
bool serve(Runtime& runtime, httplib::Server& server);

}  // namespace futureyou::service
