#include "futureyou/service/service.hpp"

#include <fmt/format.h>

#include <algorithm>

#include "futureyou/image_codec.hpp"
#include "futureyou/strings.hpp"

namespace futureyou::service {
namespace {

constexpr std::array<Stage, 8> kAllStages = {Stage::consent,    Stage::pre_survey, Stage::life_story,
                                             Stage::portrait,   Stage::aging,      Stage::chat,
                                             Stage::post_survey, Stage::done};

nlohmann::json battery_json(const measures::ScaleBattery& b) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [id, v] : b.responses) j[id] = v;
  return j;
}

measures::ScaleBattery battery_from_json(const nlohmann::json& j, measures::BatteryPhase phase) {
  if (!j.is_object()) throw InvalidPayload("\"responses\" must be an object of item id to integer");
  measures::ScaleBattery b{phase, {}};
  for (const auto& [id, v] : j.items()) {
    if (!v.is_number_integer()) throw InvalidPayload("response for '" + id + "' must be an integer");
    b.responses[id] = v.get<int>();
  }
  return b;
}

measures::ScaleBattery checked_battery(const nlohmann::json& payload, measures::BatteryPhase phase,
                                       const measures::Instrument& instrument) {
  if (!payload.contains("responses")) throw InvalidPayload("payload needs \"responses\"");
  auto b = battery_from_json(payload.at("responses"), phase);
  try {
    measures::validate_battery(b, instrument);
  } catch (const measures::IncompleteBattery& e) {
    throw InvalidPayload(e.what());
  } catch (const measures::OutOfRange& e) {
    throw InvalidPayload(e.what());
  }
  return b;
}

std::map<std::string, std::string> string_map(const nlohmann::json& j, const char* field) {
  if (!j.is_object()) throw InvalidPayload(fmt::format("\"{}\" must be an object", field));
  std::map<std::string, std::string> out;
  for (const auto& [k, v] : j.items()) {
    if (v.is_string()) {
      out[k] = v.get<std::string>();
    } else if (v.is_number_integer()) {
      out[k] = std::to_string(v.get<long long>());
    } else {
      throw InvalidPayload(fmt::format("\"{}.{}\" must be a string", field, k));
    }
  }
  return out;
}

bool optional_bool(const nlohmann::json& payload, const char* field) {
  if (!payload.contains(field)) return false;
  const auto& v = payload.at(field);
  if (!v.is_boolean()) throw InvalidPayload(fmt::format("\"{}\" must be true or false", field));
  return v.get<bool>();
}

nlohmann::json transcript_json(const std::vector<chat::Message>& messages, const std::string& session_id) {
  auto j = nlohmann::json::array();
  for (const auto& m : messages) j.push_back(chat::to_json(m, session_id));
  return j;
}

nlohmann::json portrait_json(const PortraitResult& p) {
  return {{"original_ref", p.original_ref}, {"aged_ref", p.aged_ref}, {"fallback", p.fallback}, {"error", p.error}};
}

nlohmann::json opt_time(const std::optional<TimePoint>& t) {
  return t ? nlohmann::json(to_rfc3339(*t)) : nlohmann::json(nullptr);
}

}  // namespace

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::consent:
      return "consent";
    case Stage::pre_survey:
      return "pre_survey";
    case Stage::life_story:
      return "life_story";
    case Stage::portrait:
      return "portrait";
    case Stage::aging:
      return "aging";
    case Stage::chat:
      return "chat";
    case Stage::post_survey:
      return "post_survey";
    case Stage::done:
      return "done";
  }
  return "done";
}

Stage stage_from_string(std::string_view s) {
  for (auto st : kAllStages) {
    if (to_string(st) == s) return st;
  }
  throw InvalidPayload("unknown stage '" + std::string(s) + "'");
}

const std::vector<Stage>& stage_flow(Condition c) {
  static const std::vector<Stage> future_you = {Stage::consent, Stage::pre_survey, Stage::life_story,
                                                Stage::portrait, Stage::aging,     Stage::chat,
                                                Stage::post_survey, Stage::done};
  static const std::vector<Stage> questionnaire = {Stage::consent, Stage::pre_survey, Stage::life_story,
                                                   Stage::post_survey, Stage::done};
  static const std::vector<Stage> chat = {Stage::consent, Stage::pre_survey, Stage::chat, Stage::post_survey,
                                          Stage::done};
  static const std::vector<Stage> control = {Stage::consent, Stage::pre_survey, Stage::post_survey, Stage::done};
  switch (c) {
    case Condition::future_you:
      return future_you;
    case Condition::questionnaire:
      return questionnaire;
    case Condition::chat:
      return chat;
    case Condition::control:
      return control;
  }
  return control;
}

Stage next_stage(Condition c, Stage s) {
  const auto& flow = stage_flow(c);
  auto it = std::find(flow.begin(), flow.end(), s);
  if (it == flow.end() || s == Stage::done) {
    throw WrongStage(s, "no next stage in the " + std::string(harness::to_string(c)) + " flow");
  }
  return *std::next(it);
}

nlohmann::json to_json(const SessionEnvelope& e) {
  return {{"session_id", e.session_id},
          {"condition", harness::to_string(e.condition)},
          {"stage", to_string(e.stage)},
          {"created_at", to_rfc3339(e.created_at)}};
}

std::string make_session_id(std::uint64_t seed, std::uint64_t counter) {
  return "s" + hex64(splitmix64(splitmix64(seed) ^ (counter + 1)));
}

const std::vector<std::uint8_t>& silhouette_png() {
  static const std::vector<std::uint8_t> png = [] {
    image::RgbImage img{256, 256, std::vector<std::uint8_t>(256 * 256 * 3, 214)};
    for (int y = 0; y < 256; ++y) {
      for (int x = 0; x < 256; ++x) {
        const double hx = (x - 128) / 46.0, hy = (y - 100) / 56.0;
        const double bx = (x - 128) / 100.0, by = (y - 256) / 80.0;
        if (hx * hx + hy * hy <= 1.0 || bx * bx + by * by <= 1.0) {
          auto* px = &img.pixels[(static_cast<std::size_t>(y) * 256 + x) * 3];
          px[0] = px[1] = px[2] = 150;
        }
      }
    }
    return image::encode_png(img);
  }();
  return png;
}

struct Service::Session {
  std::mutex mu;
  SessionEnvelope env;
  std::int64_t last_sequence = -1;

  bool consent = false;
  std::map<std::string, std::string> demographics;
  std::optional<measures::ScaleBattery> pre;
  std::optional<measures::ScaleBattery> post;
  std::optional<life_story::LifeStoryProfile> profile;
  std::optional<memory::FutureMemory> memory;
  std::optional<PortraitResult> portrait;
  std::optional<chat::PersonaContext> persona;
  std::vector<chat::Message> transcript;
  std::optional<chat::ChatSession> chat;
  std::optional<TimePoint> chat_started;
  std::optional<TimePoint> chat_ended;
  std::optional<TimePoint> finished_at;
  bool finish_override = false;
  bool min_time_violation = false;
  bool technical_issue_reported = false;

  bool technical_issue() const { return technical_issue_reported || (portrait && portrait->fallback); }
};

Service::Service(ServiceOptions options, std::shared_ptr<EventStore> store,
                 std::shared_ptr<const llm::ChatBackend> backend, std::shared_ptr<aging::ImageStore> images,
                 Clock clock, const life_story::QuestionSchema& schema, const memory::ProbingCatalog& catalog,
                 const measures::Instrument& instrument)
    : options_(std::move(options)),
      store_(std::move(store)),
      backend_(std::move(backend)),
      images_(std::move(images)),
      clock_(std::move(clock)),
      schema_(schema),
      catalog_(catalog),
      instrument_(instrument) {
  if (!store_ || !backend_ || !images_) throw Error("service needs an event store, a chat backend and an image store");
}

Service::~Service() = default;

void Service::apply(Session& s, const EventLogEntry& e) {
  if (e.sequence <= s.last_sequence) {
    throw StorageError(fmt::format("event {} of session '{}' is out of order", e.sequence, s.env.session_id));
  }
  const auto& p = e.payload;
  try {
    switch (e.kind) {
      case EventKind::stage_change: {
        const Stage to = stage_from_string(p.at("to").get<std::string>());
        if (s.env.stage == Stage::chat && to != Stage::chat) {
          s.chat_ended = e.timestamp;
          s.finish_override = p.value("override", false);
          s.min_time_violation = p.value("min_time_violation", false);
          if (s.chat) s.chat = chat::ChatSession::replay(s.env.session_id, *s.persona, s.transcript, true, options_.chat);
        }
        if (to == Stage::chat) {
          s.persona = chat::persona_from_json(p.at("persona"));
          s.transcript.clear();
          for (const auto& m : p.at("messages")) s.transcript.push_back(chat::message_from_json(m));
          s.chat = chat::ChatSession::replay(s.env.session_id, *s.persona, s.transcript, false, options_.chat);
          s.chat_started = e.timestamp;
        }
        if (to == Stage::done) s.finished_at = e.timestamp;
        s.env.stage = to;
        break;
      }
      case EventKind::survey_submitted: {
        const Stage stage = stage_from_string(p.at("stage").get<std::string>());
        if (stage == Stage::consent) {
          s.consent = p.at("consent").get<bool>();
          s.demographics = p.at("demographics").get<std::map<std::string, std::string>>();
        } else if (stage == Stage::pre_survey) {
          s.pre = battery_from_json(p.at("responses"), measures::BatteryPhase::pre);
        } else if (stage == Stage::post_survey) {
          s.post = battery_from_json(p.at("responses"), measures::BatteryPhase::post);
          s.technical_issue_reported = p.value("technical_issue", false);
        } else if (stage == Stage::life_story) {
          s.profile = p.at("answers").get<life_story::LifeStoryProfile>();
        } else {
          throw StorageError("survey event for stage '" + std::string(to_string(stage)) + "'");
        }
        break;
      }
      case EventKind::backstory_ready:
        s.memory = memory::future_memory_from_json(p.at("memory"));
        break;
      case EventKind::portrait_uploaded:
        s.portrait = PortraitResult{p.at("original_ref").get<std::string>(), p.at("aged_ref").get<std::string>(),
                                    p.at("fallback").get<bool>(), p.value("error", std::string())};
        break;
      case EventKind::message: {
        if (!s.persona) throw StorageError("message event outside a chat");
        s.transcript.push_back(chat::message_from_json(p));
        s.chat = chat::ChatSession::replay(s.env.session_id, *s.persona, s.transcript, s.chat_ended.has_value(),
                                           options_.chat);
        break;
      }
    }
  } catch (const StorageError&) {
    throw;
  } catch (const std::exception& ex) {
    throw StorageError(fmt::format("cannot apply event {} of session '{}': {}", e.sequence, s.env.session_id,
                                   ex.what()));
  }
  s.last_sequence = e.sequence;
}

void Service::commit(Session& s, EventKind kind, nlohmann::json payload) {
  EventLogEntry e{s.env.session_id, s.last_sequence + 1, kind, std::move(payload), now()};
  store_->append(e);
  apply(s, e);
}

std::shared_ptr<Service::Session> Service::load(const IndexEntry& entry) {
  auto s = std::make_shared<Session>();
  s->env = {entry.session_id, harness::condition_from_string(entry.condition), Stage::consent, entry.created_at};
  for (const auto& e : store_->read(entry.session_id)) apply(*s, e);
  if (s->last_sequence < 0) throw StorageError("session '" + entry.session_id + "' has an empty log");
  return s;
}

std::size_t Service::recover() {
  const auto index = store_->index();
  std::map<std::string, std::shared_ptr<Session>> loaded;
  std::vector<std::string> order;
  for (const auto& entry : index) {
    loaded[entry.session_id] = load(entry);
    order.push_back(entry.session_id);
  }
  std::lock_guard lock(mu_);
  sessions_ = std::move(loaded);
  order_ = std::move(order);
  counter_ = std::max<std::uint64_t>(counter_, index.size());
  return index.size();
}

std::shared_ptr<Service::Session> Service::find(const std::string& session_id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw SessionNotFound(session_id);
  return it->second;
}

SessionEnvelope Service::create_session(std::optional<Condition> condition_override) {
  std::lock_guard lock(mu_);
  const std::string id = make_session_id(options_.seed, counter_++);
  const Condition condition =
      condition_override ? *condition_override : harness::assign_condition(id, options_.weights, options_.seed);
  const TimePoint created = now();
  EventLogEntry first{id, 0, EventKind::stage_change,
                      {{"from", nullptr}, {"to", to_string(Stage::consent)}, {"condition", harness::to_string(condition)}},
                      created};
  store_->create({id, std::string(harness::to_string(condition)), created}, first);
  auto s = std::make_shared<Session>();
  s->env = {id, condition, Stage::consent, created};
  apply(*s, first);
  sessions_[id] = s;
  order_.push_back(id);
  return s->env;
}

SessionEnvelope Service::envelope(const std::string& session_id) const {
  auto s = find(session_id);
  std::lock_guard lock(s->mu);
  return s->env;
}

std::vector<SessionEnvelope> Service::sessions() const {
  std::vector<std::shared_ptr<Session>> list;
  {
    std::lock_guard lock(mu_);
    for (const auto& id : order_) list.push_back(sessions_.at(id));
  }
  std::vector<SessionEnvelope> out;
  for (const auto& s : list) {
    std::lock_guard lock(s->mu);
    out.push_back(s->env);
  }
  return out;
}

SessionEnvelope Service::advance_stage(const std::string& session_id, const nlohmann::json& payload) {
  auto sp = find(session_id);
  Session& s = *sp;
  std::lock_guard lock(s.mu);
  if (s.env.stage == Stage::done) throw SessionDone();
  if (!payload.is_object() || !payload.contains("stage") || !payload.at("stage").is_string()) {
    throw InvalidPayload("payload must be an object naming the current \"stage\"");
  }
  const Stage claimed = stage_from_string(payload.at("stage").get<std::string>());
  if (claimed != s.env.stage) {
    throw WrongStage(s.env.stage, "payload is for '" + std::string(to_string(claimed)) + "'");
  }
  const Stage from = s.env.stage;
  const Stage to = next_stage(s.env.condition, from);
  nlohmann::json change = {{"from", to_string(from)}, {"to", to_string(to)}};

  switch (from) {
    case Stage::consent: {
      if (!payload.contains("consent") || payload.at("consent") != true) {
        throw InvalidPayload("consent must be given to continue");
      }
      std::map<std::string, std::string> demographics;
      if (payload.contains("demographics")) demographics = string_map(payload.at("demographics"), "demographics");
      commit(s, EventKind::survey_submitted,
             {{"stage", to_string(from)}, {"consent", true}, {"demographics", demographics}});
      break;
    }
    case Stage::pre_survey: {
      auto battery = checked_battery(payload, measures::BatteryPhase::pre, instrument_);
      commit(s, EventKind::survey_submitted, {{"stage", to_string(from)}, {"responses", battery_json(battery)}});
      if (to == Stage::chat) {
        auto persona = chat::PersonaContext::generic_assistant();
        auto cs = chat::start_session(s.env.session_id, persona, *backend_, clock_, options_.chat);
        change["persona"] = chat::to_json(persona);
        change["messages"] = transcript_json(cs.transcript(), s.env.session_id);
      }
      break;
    }
    case Stage::life_story: {
      if (!payload.contains("answers")) throw InvalidPayload("payload needs \"answers\"");
      const auto answers = string_map(payload.at("answers"), "answers");
      life_story::LifeStoryProfile profile;
      try {
        profile = life_story::validate_profile(answers, schema_);
      } catch (const life_story::MissingAnswer& e) {
        throw InvalidPayload(e.what());
      } catch (const life_story::InvalidAge& e) {
        throw InvalidPayload(e.what());
      }
      std::optional<memory::FutureMemory> mem;
      if (s.env.condition == Condition::future_you) {
        auto fragments = memory::generate_fragments(profile, *backend_, options_.generation, catalog_);
        mem = memory::assemble_backstory(memory::render_base_prompt(profile), std::move(fragments), options_.assembly);
      }
      commit(s, EventKind::survey_submitted, {{"stage", to_string(from)}, {"answers", profile}});
      if (mem) commit(s, EventKind::backstory_ready, {{"memory", memory::to_json(*mem)}});
      break;
    }
    case Stage::portrait:
      if (!s.portrait) throw InvalidPayload("upload a portrait before continuing");
      break;
    case Stage::aging: {
      if (!s.memory || !s.portrait) throw StorageError("session reached aging without a backstory and portrait");
      auto persona = chat::PersonaContext::future_self(*s.memory, s.portrait->aged_ref);
      auto cs = chat::start_session(s.env.session_id, persona, *backend_, clock_, options_.chat);
      change["persona"] = chat::to_json(persona);
      change["messages"] = transcript_json(cs.transcript(), s.env.session_id);
      break;
    }
    case Stage::chat: {
      const bool override_limits = optional_bool(payload, "override");
      const auto bounds = harness::session_time_bounds(s.env.condition);
      const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(now() - *s.chat_started);
      if (override_limits) {
        if (!bounds || elapsed < bounds->max) {
          throw InvalidPayload("override is only available once the maximum session time has passed");
        }
      } else if (!chat::finish_eligibility(*s.chat)) {
        const int needed = options_.chat.finish_threshold;
        const int have = options_.chat.counting == chat::ExchangeCounting::pairs ? s.chat->exchanged_count() / 2
                                                                                 : s.chat->exchanged_count();
        throw chat::NotEligible(have, needed);
      }
      change["override"] = override_limits;
      change["min_time_violation"] = bounds.has_value() && elapsed < bounds->min;
      change["elapsed_ms"] = elapsed.count();
      break;
    }
    case Stage::post_survey: {
      auto battery = checked_battery(payload, measures::BatteryPhase::post, instrument_);
      const bool issue = optional_bool(payload, "technical_issue");
      commit(s, EventKind::survey_submitted,
             {{"stage", to_string(from)}, {"responses", battery_json(battery)}, {"technical_issue", issue}});
      break;
    }
    case Stage::done:
      throw SessionDone();
  }
  commit(s, EventKind::stage_change, std::move(change));
  return s.env;
}

PortraitResult Service::upload_portrait(const std::string& session_id, std::span<const std::uint8_t> bytes) {
  auto sp = find(session_id);
  Session& s = *sp;
  std::lock_guard lock(s.mu);
  if (s.env.stage == Stage::done) throw SessionDone();
  if (s.env.stage != Stage::portrait) throw WrongStage(s.env.stage, "portraits are uploaded at the portrait stage");
  auto portrait = aging::Portrait::from_bytes(std::vector<std::uint8_t>(bytes.begin(), bytes.end()));
  PortraitResult result;
  result.original_ref = images_->put(portrait.image_bytes, portrait.media_type);
  try {
    auto aged = aging::age_progress(portrait, options_.aging);
    result.aged_ref = images_->put(aged.image_bytes, aged.media_type);
  } catch (const aging::ProviderError& e) {
    result.aged_ref = std::string(aging::kSilhouetteRef);
    result.fallback = true;
    result.error = e.what();
  }
  commit(s, EventKind::portrait_uploaded, portrait_json(result));
  return result;
}

chat::Message Service::post_message(const std::string& session_id, std::string_view text) {
  auto sp = find(session_id);
  Session& s = *sp;
  std::lock_guard lock(s.mu);
  if (s.env.stage == Stage::done) throw SessionDone();
  if (s.env.stage != Stage::chat) throw WrongStage(s.env.stage, "messages are only accepted during the chat");
  chat::ChatSession work = *s.chat;
  const std::size_t before = work.transcript().size();
  auto log_new = [&] {
    for (std::size_t i = before; i < work.transcript().size(); ++i) {
      commit(s, EventKind::message, chat::to_json(work.transcript()[i], s.env.session_id));
    }
  };
  try {
    auto reply = chat::post_user_message(work, text, *backend_, clock_);
    log_new();
    return reply;
  } catch (const chat::BackendError&) {
    log_new();
    throw;
  }
}

chat::Message Service::retry_reply(const std::string& session_id) {
  auto sp = find(session_id);
  Session& s = *sp;
  std::lock_guard lock(s.mu);
  if (s.env.stage == Stage::done) throw SessionDone();
  if (s.env.stage != Stage::chat) throw WrongStage(s.env.stage, "retry is only available during the chat");
  chat::ChatSession work = *s.chat;
  auto reply = chat::retry_reply(work, *backend_, clock_);
  commit(s, EventKind::message, chat::to_json(reply, s.env.session_id));
  return reply;
}

MessagesPage Service::messages_since(const std::string& session_id, int since) const {
  if (since < 0) throw InvalidPayload("\"since\" must be a non-negative message index");
  auto sp = find(session_id);
  const Session& s = *sp;
  std::lock_guard lock(sp->mu);
  MessagesPage page;
  page.next = std::max(since, static_cast<int>(s.transcript.size()));
  for (const auto& m : s.transcript) {
    if (m.index >= since) page.messages.push_back(m);
  }
  if (s.chat) {
    page.finish_eligible = s.env.stage == Stage::chat && chat::finish_eligibility(*s.chat);
    page.reply_pending = s.chat->reply_pending();
    page.exchanged_count = s.chat->exchanged_count();
  }
  return page;
}

std::vector<harness::ParticipantRecord> Service::records() const {
  std::vector<std::shared_ptr<Session>> list;
  {
    std::lock_guard lock(mu_);
    for (const auto& id : order_) list.push_back(sessions_.at(id));
  }
  std::vector<harness::ParticipantRecord> out;
  for (const auto& sp : list) {
    std::lock_guard lock(sp->mu);
    const Session& s = *sp;
    if (s.env.stage != Stage::done) continue;
    harness::ParticipantRecord r;
    r.participant_id = s.env.session_id;
    r.condition = s.env.condition;
    r.pre = s.pre;
    r.post = s.post;
    r.attention_passed =
        measures::attention_passed(*s.pre, instrument_) && measures::attention_passed(*s.post, instrument_);
    r.technical_issue = s.technical_issue();
    r.min_time_violation = s.min_time_violation;
    r.demographics = s.demographics;
    r.started_at = s.env.created_at;
    r.finished_at = s.finished_at;
    out.push_back(std::move(r));
  }
  return out;
}

std::string Service::export_dataset(const ExportFilter& filter) const {
  auto recs = records();
  if (filter.drop_excluded) recs = harness::apply_exclusions(recs).kept;
  std::vector<harness::ParticipantDeltas> rows;
  for (const auto& r : recs) {
    if (filter.condition && r.condition != *filter.condition) continue;
    rows.push_back(harness::participant_deltas(r, instrument_));
  }
  return harness::write_deltas_csv(rows);
}

std::vector<harness::ReportRow> Service::report() const {
  const auto kept = harness::apply_exclusions(records()).kept;
  return harness::build_report(kept, harness::ReportOptions{options_.analysis}, instrument_);
}

nlohmann::json Service::describe(const std::string& session_id) const {
  auto sp = find(session_id);
  std::lock_guard lock(sp->mu);
  const Session& s = *sp;
  auto j = to_json(s.env);
  auto flow = nlohmann::json::array();
  for (auto st : stage_flow(s.env.condition)) flow.push_back(to_string(st));
  j["flow"] = flow;
  j["technical_issue"] = s.technical_issue();
  if (s.portrait) j["portrait"] = portrait_json(*s.portrait);
  switch (s.env.stage) {
    case Stage::pre_survey:
    case Stage::post_survey: {
      const auto phase = s.env.stage == Stage::pre_survey ? measures::BatteryPhase::pre : measures::BatteryPhase::post;
      auto items = nlohmann::json::array();
      for (const auto& it : instrument_.items_for(phase)) {
        items.push_back({{"id", it.item_id}, {"prompt", it.prompt_text}, {"attention_check", it.attention_check}});
      }
      j["items"] = items;
      j["scale"] = {{"min", measures::kMinResponse}, {"max", measures::kMaxResponse}};
      break;
    }
    case Stage::life_story:
      j["questions"] = schema_.to_json();
      break;
    case Stage::chat: {
      const auto bounds = harness::session_time_bounds(s.env.condition);
      const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(now() - *s.chat_started);
      j["chat"] = {{"message_count", s.transcript.size()},
                   {"exchanged_count", s.chat->exchanged_count()},
                   {"finish_eligible", chat::finish_eligibility(*s.chat)},
                   {"reply_pending", s.chat->reply_pending()},
                   {"started_at", to_rfc3339(*s.chat_started)},
                   {"elapsed_ms", elapsed.count()},
                   {"avatar_ref", s.persona->aged_portrait_ref}};
      if (bounds) {
        j["chat"]["min_minutes"] = bounds->min.count();
        j["chat"]["max_minutes"] = bounds->max.count();
        j["chat"]["min_time_reached"] = elapsed >= bounds->min;
        j["chat"]["override_available"] = elapsed >= bounds->max;
      }
      break;
    }
    default:
      break;
  }
  return j;
}

nlohmann::json Service::snapshot(const std::string& session_id) const {
  auto sp = find(session_id);
  std::lock_guard lock(sp->mu);
  const Session& s = *sp;
  nlohmann::json j = {{"envelope", to_json(s.env)},
                      {"last_sequence", s.last_sequence},
                      {"consent", s.consent},
                      {"demographics", s.demographics},
                      {"pre", s.pre ? battery_json(*s.pre) : nlohmann::json(nullptr)},
                      {"post", s.post ? battery_json(*s.post) : nlohmann::json(nullptr)},
                      {"profile", s.profile ? nlohmann::json(*s.profile) : nlohmann::json(nullptr)},
                      {"memory", s.memory ? memory::to_json(*s.memory) : nlohmann::json(nullptr)},
                      {"portrait", s.portrait ? portrait_json(*s.portrait) : nlohmann::json(nullptr)},
                      {"persona", s.persona ? chat::to_json(*s.persona) : nlohmann::json(nullptr)},
                      {"transcript", transcript_json(s.transcript, s.env.session_id)},
                      {"chat_started", opt_time(s.chat_started)},
                      {"chat_ended", opt_time(s.chat_ended)},
                      {"finished_at", opt_time(s.finished_at)},
                      {"finish_override", s.finish_override},
                      {"min_time_violation", s.min_time_violation},
                      {"technical_issue", s.technical_issue()}};
  if (s.chat) {
    j["chat"] = {{"phase", chat::to_string(s.chat->phase())},
                 {"exchanged_count", s.chat->exchanged_count()},
                 {"reply_pending", s.chat->reply_pending()}};
  }
  return j;
}

std::optional<std::vector<std::uint8_t>> Service::image(const std::string& ref) const {
  if (ref == aging::kSilhouetteRef) return silhouette_png();
  return images_->get(ref);
}

}  // namespace futureyou::service
