#include "futureyou/service/http.hpp"

#include <fmt/format.h>

#include <charconv>

#include "futureyou/image_codec.hpp"

namespace futureyou::service {
namespace {

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const HttpError& e) {
  send_json(res, e.status, {{"error", e.code}, {"message", e.message}});
}

template <typename F>
auto guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const std::exception& e) {
      send_error(res, classify(e));
    }
  };
}

nlohmann::json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return nlohmann::json::object();
  return nlohmann::json::parse(req.body);
}

nlohmann::json message_json(const chat::Message& m, const std::string& session_id) {
  return chat::to_json(m, session_id);
}

nlohmann::json page_json(const MessagesPage& page, const std::string& session_id) {
  auto messages = nlohmann::json::array();
  for (const auto& m : page.messages) messages.push_back(message_json(m, session_id));
  return {{"messages", messages},
          {"next", page.next},
          {"finish_eligible", page.finish_eligible},
          {"reply_pending", page.reply_pending},
          {"exchanged_count", page.exchanged_count}};
}

int parse_since(const httplib::Request& req) {
  if (!req.has_param("since")) return 0;
  const auto v = req.get_param_value("since");
  int out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || out < 0) {
    throw InvalidPayload("\"since\" must be a non-negative integer");
  }
  return out;
}

template <typename... T>
bool one_of(const std::exception& e) {
  return ((dynamic_cast<const T*>(&e) != nullptr) || ...);
}

}  // namespace

HttpError classify(const std::exception& e) {
  if (one_of<nlohmann::json::exception>(e)) return {400, "malformed_json", e.what()};
  if (one_of<SessionNotFound>(e)) return {404, "not_found", e.what()};
  if (one_of<InvalidPayload, chat::EmptyMessage, image::DecodeError, aging::TooSmall, harness::InvalidCondition>(e)) {
    return {422, "invalid_payload", e.what()};
  }
  if (one_of<WrongStage>(e)) return {409, "wrong_stage", e.what()};
  if (one_of<SessionDone, chat::SessionFinished>(e)) return {409, "session_done", e.what()};
  if (one_of<chat::NotEligible>(e)) return {409, "not_eligible", e.what()};
  if (one_of<chat::NoPendingReply>(e)) return {409, "no_pending_reply", e.what()};
  if (one_of<harness::InsufficientGroups>(e)) return {409, "insufficient_data", e.what()};
  if (one_of<chat::BackendError, memory::BackendError, llm::GatewayError>(e)) {
    return {502, "backend_unavailable", e.what()};
  }
  if (one_of<StorageError>(e)) return {503, "storage_unavailable", e.what()};
  return {500, "internal", e.what()};
}

void install_routes(httplib::Server& server, Service& service, const RouteOptions& options) {
  server.Post("/sessions", guarded([&service, options](const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    std::optional<Condition> condition;
    if (body.contains("condition")) {
      if (!options.allow_condition_override) throw InvalidPayload("choosing a condition is disabled");
      if (!body.at("condition").is_string()) throw InvalidPayload("\"condition\" must be a string");
      condition = harness::condition_from_string(body.at("condition").get<std::string>());
    }
    const auto env = service.create_session(condition);
    send_json(res, 201, service.describe(env.session_id));
  }));

  server.Get("/sessions/:id", guarded([&service](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 200, service.describe(req.path_params.at("id")));
  }));

  server.Post("/sessions/:id/advance", guarded([&service](const httplib::Request& req, httplib::Response& res) {
    const auto& id = req.path_params.at("id");
    service.advance_stage(id, parse_body(req));
    send_json(res, 200, service.describe(id));
  }));

  server.Post("/sessions/:id/messages", guarded([&service](const httplib::Request& req, httplib::Response& res) {
    const auto& id = req.path_params.at("id");
    const auto body = parse_body(req);
    if (!body.contains("text") || !body.at("text").is_string()) throw InvalidPayload("payload needs \"text\"");
    const auto reply = service.post_message(id, body.at("text").get<std::string>());
    send_json(res, 200, {{"reply", message_json(reply, id)}, {"state", page_json(service.messages_since(id, 0), id)}});
  }));

  server.Post("/sessions/:id/messages/retry", guarded([&service](const httplib::Request& req, httplib::Response& res) {
    const auto& id = req.path_params.at("id");
    const auto reply = service.retry_reply(id);
    send_json(res, 200, {{"reply", message_json(reply, id)}});
  }));

  server.Get("/sessions/:id/messages", guarded([&service](const httplib::Request& req, httplib::Response& res) {
    const auto& id = req.path_params.at("id");
    send_json(res, 200, page_json(service.messages_since(id, parse_since(req)), id));
  }));

  server.Post("/sessions/:id/portrait", guarded([&service](const httplib::Request& req, httplib::Response& res) {
    const auto& id = req.path_params.at("id");
    std::string bytes;
    if (req.is_multipart_form_data()) {
      if (!req.has_file("image")) throw InvalidPayload("multipart upload needs an \"image\" field");
      bytes = req.get_file_value("image").content;
    } else {
      bytes = req.body;
    }
    if (bytes.empty()) throw InvalidPayload("empty portrait upload");
    const auto* data = reinterpret_cast<const std::uint8_t*>(bytes.data());
    const auto result = service.upload_portrait(id, std::span<const std::uint8_t>(data, bytes.size()));
    send_json(res, 200,
              {{"original_ref", result.original_ref},
               {"aged_ref", result.aged_ref},
               {"fallback", result.fallback},
               {"error", result.error}});
  }));

  server.Get("/export.csv", guarded([&service](const httplib::Request& req, httplib::Response& res) {
    ExportFilter filter;
    if (req.has_param("condition")) filter.condition = harness::condition_from_string(req.get_param_value("condition"));
    filter.drop_excluded = req.has_param("drop_excluded") && req.get_param_value("drop_excluded") == "true";
    res.set_content(service.export_dataset(filter), "text/csv");
  }));

  server.Get("/report", guarded([&service](const httplib::Request& req, httplib::Response& res) {
    const auto rows = service.report();
    if (req.has_param("format") && req.get_param_value("format") == "json") {
      send_json(res, 200, harness::to_json(rows));
    } else {
      res.set_content(harness::render_text(rows), "text/plain; charset=utf-8");
    }
  }));

  server.Get("/schema", guarded([&service](const httplib::Request&, httplib::Response& res) {
    nlohmann::json flows = nlohmann::json::object();
    for (auto c : harness::kReportConditions) {
      auto flow = nlohmann::json::array();
      for (auto s : stage_flow(c)) flow.push_back(to_string(s));
      flows[std::string(harness::to_string(c))] = flow;
    }
    send_json(res, 200,
              {{"questions", service.schema().to_json()},
               {"instrument", service.instrument().to_json()},
               {"flows", flows},
               {"finish_threshold", service.options().chat.finish_threshold}});
  }));

  server.Get("/images/:ref", guarded([&service](const httplib::Request& req, httplib::Response& res) {
    const auto bytes = service.image(req.path_params.at("ref"));
    if (!bytes) {
      send_error(res, {404, "not_found", "no such image"});
      return;
    }
    const auto type = image::sniff(*bytes).value_or(image::MediaType::png);
    res.set_content(std::string(bytes->begin(), bytes->end()), std::string(image::mime_type(type)));
  }));

  server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) { res.set_content("ok", "text/plain"); });
}

Runtime::Runtime(const ServiceConfig& config, Clock clock) : config_(config) {
  if (!config_.content.question_schema.empty()) {
    schema_ = life_story::QuestionSchema::load(config_.content.question_schema);
  }
  if (!config_.content.probing_topics.empty()) {
    catalog_ = memory::ProbingCatalog::load(config_.content.probing_topics);
  }
  if (!config_.content.instruments.empty()) instrument_ = measures::Instrument::load(config_.content.instruments);
  auto store = std::make_shared<FileEventStore>(config_.server.data_dir / "events", config_.server.fsync);
  auto images = std::make_shared<aging::ImageStore>(config_.server.data_dir / "images");
  service_ = std::make_unique<Service>(config_.options, std::move(store), llm::make_backend(config_.backend),
                                       std::move(images), std::move(clock),
                                       schema_ ? *schema_ : life_story::QuestionSchema::default_schema(),
                                       catalog_ ? *catalog_ : memory::ProbingCatalog::defaults(),
                                       instrument_ ? *instrument_ : measures::Instrument::defaults());
}

bool serve(Runtime& runtime, httplib::Server& server) {
  runtime.service().recover();
  install_routes(server, runtime.service(), {runtime.config().allow_condition_override});
  const auto& web_root = runtime.config().server.web_root;
  if (!web_root.empty() && !server.set_mount_point("/", web_root.string())) {
    throw ConfigError("web_root " + web_root.string() + " is not a directory");
  }
  return server.listen(runtime.config().server.host, runtime.config().server.port);
}

}  // namespace futureyou::service
