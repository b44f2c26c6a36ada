#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "futureyou/age_progression.hpp"
#include "futureyou/chat_orchestrator.hpp"
#include "futureyou/error.hpp"
#include "futureyou/experiment_harness.hpp"
#include "futureyou/life_story.hpp"
#include "futureyou/measures.hpp"
#include "futureyou/memory_engine.hpp"
#include "futureyou/service/event_store.hpp"
#include "futureyou/time_util.hpp"
#include "json.hpp"

namespace futureyou::service {

using harness::Condition;

enum class Stage { consent, pre_survey, life_story, portrait, aging, chat, post_survey, done };

std::string_view to_string(Stage s);
Stage stage_from_string(std::string_view s);

// Stages a participant of `c` walks through, consent first, done last.
const std::vector<Stage>& stage_flow(Condition c);
// Throws WrongStage when `s` is done or not part of the flow.
Stage next_stage(Condition c, Stage s);

struct SessionEnvelope {
  std::string session_id;
  Condition condition = Condition::control;
  Stage stage = Stage::consent;
  TimePoint created_at{};

  bool operator==(const SessionEnvelope&) const = default;
};

nlohmann::json to_json(const SessionEnvelope& e);

class InvalidPayload : public Error {
 public:
  using Error::Error;
};

class WrongStage : public Error {
 public:
  WrongStage(Stage actual, const std::string& detail)
      : Error("session is at stage '" + std::string(to_string(actual)) + "'" + (detail.empty() ? "" : ": " + detail)),
        actual_(actual) {}
  Stage actual() const { return actual_; }

 private:
  Stage actual_;
};

class SessionNotFound : public Error {
 public:
  explicit SessionNotFound(const std::string& id) : Error("no session '" + id + "'") {}
};

class SessionDone : public Error {
 public:
  SessionDone() : Error("the session is complete and can no longer change") {}
};

struct ServiceOptions {
  std::uint64_t seed = 0;
  harness::ConditionWeights weights = harness::equal_weights();
  chat::ChatOptions chat;
  memory::GenerationOptions generation;
  memory::AssemblyOptions assembly;
  aging::AgingConfig aging;
  stats::AnalysisOptions analysis;
};

struct PortraitResult {
  std::string original_ref;
  std::string aged_ref;  // kSilhouetteRef when aging failed
  bool fallback = false;
  std::string error;
};

struct MessagesPage {
  std::vector<chat::Message> messages;  // index >= since
  int next = 0;                         // cursor for the following poll
  bool finish_eligible = false;
  bool reply_pending = false;
  int exchanged_count = 0;
};

struct ExportFilter {
  std::optional<Condition> condition;
  bool drop_excluded = false;
};

// Ties the modules together behind the stage machine. Every state change
// is first appended to the event store and then applied from that event,
// so rebuilding from the log reproduces the live state exactly.
class Service {
 public:
  Service(ServiceOptions options, std::shared_ptr<EventStore> store, std::shared_ptr<const llm::ChatBackend> backend,
          std::shared_ptr<aging::ImageStore> images, Clock clock = system_clock(),
          const life_story::QuestionSchema& schema = life_story::QuestionSchema::default_schema(),
          const memory::ProbingCatalog& catalog = memory::ProbingCatalog::defaults(),
          const measures::Instrument& instrument = measures::Instrument::defaults());
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Loads every session in the store. Returns the number recovered.
  std::size_t recover();

  // Test mode passes an explicit condition.
  SessionEnvelope create_session(std::optional<Condition> condition_override = std::nullopt);
  SessionEnvelope envelope(const std::string& session_id) const;
  // Envelope plus what the client needs for the current stage.
  nlohmann::json describe(const std::string& session_id) const;
  std::vector<SessionEnvelope> sessions() const;

  // `payload.stage` must name the current stage.
  SessionEnvelope advance_stage(const std::string& session_id, const nlohmann::json& payload);

  // Allowed at the portrait stage; a later upload replaces the earlier one.
  PortraitResult upload_portrait(const std::string& session_id, std::span<const std::uint8_t> bytes);

  chat::Message post_message(const std::string& session_id, std::string_view text);
  chat::Message retry_reply(const std::string& session_id);
  MessagesPage messages_since(const std::string& session_id, int since) const;

  // Completed sessions only.
  std::vector<harness::ParticipantRecord> records() const;
  std::string export_dataset(const ExportFilter& filter = {}) const;
  // Over completed sessions after exclusions.
  std::vector<harness::ReportRow> report() const;

  // Full derived state of one session, for comparisons after recovery.
  nlohmann::json snapshot(const std::string& session_id) const;

  std::optional<std::vector<std::uint8_t>> image(const std::string& ref) const;

  const ServiceOptions& options() const { return options_; }
  const life_story::QuestionSchema& schema() const { return schema_; }
  const measures::Instrument& instrument() const { return instrument_; }

 private:
  struct Session;

  std::shared_ptr<Session> find(const std::string& session_id) const;
  std::shared_ptr<Session> load(const IndexEntry& entry);
  void commit(Session& s, EventKind kind, nlohmann::json payload);
  void apply(Session& s, const EventLogEntry& e);
  TimePoint now() const { return clock_(); }

  ServiceOptions options_;
  std::shared_ptr<EventStore> store_;
  std::shared_ptr<const llm::ChatBackend> backend_;
  std::shared_ptr<aging::ImageStore> images_;
  Clock clock_;
  const life_story::QuestionSchema& schema_;
  const memory::ProbingCatalog& catalog_;
  const measures::Instrument& instrument_;

  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::vector<std::string> order_;
  std::uint64_t counter_ = 0;
};

// Deterministic in (seed, counter).
std::string make_session_id(std::uint64_t seed, std::uint64_t counter);

// Grey silhouette served for kSilhouetteRef.
const std::vector<std::uint8_t>& silhouette_png();

}  // namespace futureyou::service
