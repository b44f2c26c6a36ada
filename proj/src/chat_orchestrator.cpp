#include "futureyou/chat_orchestrator.hpp"

#include <algorithm>
#include <deque>

#include "futureyou/strings.hpp"

namespace futureyou::chat {
namespace {

std::size_t count_standalone(std::string_view text, std::string_view number) {
  std::size_t count = 0;
  for (std::size_t pos = text.find(number); pos != std::string_view::npos; pos = text.find(number, pos + 1)) {
    const bool digit_before = pos > 0 && text[pos - 1] >= '0' && text[pos - 1] <= '9';
    const std::size_t end = pos + number.size();
    const bool digit_after = end < text.size() && text[end] >= '0' && text[end] <= '9';
    if (!digit_before && !digit_after) ++count;
  }
  return count;
}

}  // namespace

const std::vector<std::string>& opening_script() {
  static const std::vector<std::string> script = {
      "Can you casually introduce yourself, your name, and your age, which is 60 years old, and why you "
      "are here? Casually and briefly mention that the future might be different than you expect and "
      "mention that your future might be different.",
      "Please briefly tell me what your dream was with “when I was your age...” and how it turned out "
      "to be. What are the things that you expect and didn't expect?",
      "Please tell me the happiest stories about your family as you reflected in the last 30 years, "
      "starting with “You know, when I think of my life...”, and share insightful motivation for my "
      "future.",
      "Reflecting on past experiences, what and how has the life project you have been involved in "
      "deeply impacted you and others in a genuine and heartfelt way? How did you initially become "
      "involved in this project, and how has it developed over time? Furthermore, why do you believe "
      "this project holds such importance for both yourself and the individuals it has touched?"};
  return script;
}

const std::string_view kGenericAssistantInstruction =
    "You are a friendly, neutral virtual assistant. Answer the user's questions helpfully and briefly, the way a "
    "general-purpose chatbot would. Do not role-play as any particular person.";

std::string_view to_string(Sender s) {
  switch (s) {
    case Sender::user:
      return "user";
    case Sender::future_self:
      return "future_self";
    case Sender::system:
      return "system";
  }
  return "system";
}

Sender sender_from_string(std::string_view s) {
  if (s == "user") return Sender::user;
  if (s == "future_self") return Sender::future_self;
  if (s == "system") return Sender::system;
  throw Error("unknown message sender '" + std::string(s) + "'");
}

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::opening_script:
      return "opening_script";
    case Phase::freeform:
      return "freeform";
    case Phase::finished:
      return "finished";
  }
  return "finished";
}

std::string future_self_instruction(std::string_view name, int present_age) {
  const std::string n(name);
  return "You are " + n + "'s future self: " + n + " at 60 years old, texting with your younger self, who is " +
         std::to_string(present_age) +
         " today. Speak in the first person as " + n +
         ", warmly and reflectively, drawing on the life story and memories below. Notice the similarities "
         "between your younger self's goals and the path your life took. Keep each reply short and "
         "conversational, like a text message.";
}

PersonaContext PersonaContext::future_self(memory::FutureMemory memory, std::string aged_portrait_ref) {
  const auto& b = memory.base.placeholder_bindings;
  auto name = b.find("name");
  auto age = b.find("age");
  if (name == b.end() || age == b.end()) throw InvalidPersona("backstory bindings lack name or age");
  PersonaContext p;
  p.persona_instruction = future_self_instruction(name->second, std::stoi(age->second));
  p.memory = std::move(memory);
  p.aged_portrait_ref = std::move(aged_portrait_ref);
  p.validate();
  return p;
}

PersonaContext PersonaContext::generic_assistant() {
  PersonaContext p;
  p.persona_instruction = std::string(kGenericAssistantInstruction);
  return p;
}

std::string PersonaContext::system_context() const {
  if (!memory) return persona_instruction;
  return persona_instruction + "\n\n" + memory->assembled_text;
}

void PersonaContext::validate() const {
  if (trim(persona_instruction).empty()) throw InvalidPersona("persona instruction is empty");
  if (!memory) return;
  if (count_standalone(persona_instruction, "60") != 1) {
    throw InvalidPersona("future-self instruction must state the age 60 exactly once");
  }
  const auto& m = *memory;
  if (!m.base.text.starts_with(memory::kBasePromptPrefix)) throw InvalidPersona("backstory lacks the interview prompt");
  if (!m.assembled_text.starts_with(m.base.text)) throw InvalidPersona("assembled backstory does not start with its base");
  for (std::size_t i = 0; i < m.fragments.size(); ++i) {
    if (m.fragments[i].order_index != static_cast<int>(i)) throw InvalidPersona("memory fragments are out of order");
  }
}

nlohmann::json to_json(const PersonaContext& persona) {
  nlohmann::json j = {{"version", memory::kPersonaFormatVersion},
                      {"persona_instruction", persona.persona_instruction},
                      {"aged_portrait_ref", persona.aged_portrait_ref}};
  j["memory"] = persona.memory ? memory::to_json(*persona.memory) : nlohmann::json(nullptr);
  return j;
}

PersonaContext persona_from_json(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != memory::kPersonaFormatVersion) throw InvalidPersona("unsupported persona version");
    PersonaContext p;
    p.persona_instruction = j.at("persona_instruction").get<std::string>();
    p.aged_portrait_ref = j.at("aged_portrait_ref").get<std::string>();
    if (!j.at("memory").is_null()) p.memory = memory::future_memory_from_json(j.at("memory"));
    p.validate();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidPersona(std::string("malformed persona record: ") + e.what());
  }
}

nlohmann::json to_json(const Message& m, std::string_view session_id) {
  return {{"session_id", session_id},
          {"index", m.index},
          {"sender", to_string(m.sender)},
          {"text", m.text},
          {"timestamp", to_rfc3339(m.timestamp)}};
}

Message message_from_json(const nlohmann::json& j) {
  try {
    return {sender_from_string(j.at("sender").get<std::string>()), j.at("text").get<std::string>(),
            parse_rfc3339(j.at("timestamp").get<std::string>()), j.at("index").get<int>()};
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed message record: ") + e.what());
  }
}

ChatSession::ChatSession(std::string id, PersonaContext persona, ChatOptions options)
    : id_(std::move(id)), persona_(std::move(persona)), options_(options) {
  persona_.validate();
}

bool ChatSession::reply_pending() const {
  for (auto it = transcript_.rbegin(); it != transcript_.rend(); ++it) {
    if (it->sender != Sender::system) return it->sender == Sender::user;
  }
  return false;
}

Message& ChatSession::append(Sender sender, std::string text, const Clock& clock) {
  Message m{sender, std::move(text), clock(), static_cast<int>(transcript_.size())};
  if (sender != Sender::system) ++exchanged_count_;
  transcript_.push_back(std::move(m));
  return transcript_.back();
}

ChatSession ChatSession::replay(std::string id, PersonaContext persona, std::vector<Message> transcript, bool finished,
                                ChatOptions options) {
  ChatSession s(std::move(id), std::move(persona), options);
  for (std::size_t i = 0; i < transcript.size(); ++i) {
    if (transcript[i].index != static_cast<int>(i)) throw Error("transcript indices are not contiguous");
    if (transcript[i].sender != Sender::system) ++s.exchanged_count_;
  }
  if (s.persona_.scripted()) {
    const std::size_t openers = opening_script().size();
    if (transcript.size() < openers) throw Error("scripted session is missing its opening messages");
    for (std::size_t i = 0; i < openers; ++i) {
      if (transcript[i].sender != Sender::future_self) throw Error("opening messages must come from the future self");
    }
  }
  s.transcript_ = std::move(transcript);
  s.phase_ = finished ? Phase::finished : Phase::freeform;
  return s;
}

namespace {

std::string request_reply(const llm::CompletionRequest& request, const llm::ChatBackend& backend) {
  llm::CompletionResult result;
  try {
    result = backend.complete(request);
  } catch (const std::exception& e) {
    throw BackendError(std::string("reply generation failed: ") + e.what());
  }
  std::string_view text = trim(result.text);
  if (result.finish_reason == llm::FinishReason::error || text.empty()) {
    throw BackendError("reply generation returned no usable text");
  }
  return std::string(text);
}

std::size_t request_size(const llm::CompletionRequest& r) {
  std::size_t n = utf8_length(r.system_context);
  for (const auto& m : r.messages) n += utf8_length(m.text);
  return n;
}

void push_turn(std::vector<llm::ChatTurn>& turns, llm::Role role, const std::string& text) {
  if (!turns.empty() && turns.back().role == role) {
    turns.back().text += "\n\n" + text;
  } else {
    turns.push_back({role, text});
  }
}

}  // namespace

llm::CompletionRequest build_request(const ChatSession& session) {
  const auto& persona = session.persona();
  const auto& transcript = session.transcript();
  const auto& options = session.options();

  llm::CompletionRequest req;
  req.system_context = persona.system_context();
  req.temperature = options.temperature;
  req.max_output_tokens = options.max_output_tokens;

  std::size_t freeform_start = 0;
  if (persona.scripted()) {
    const auto& script = opening_script();
    for (std::size_t i = 0; i < script.size() && i < transcript.size(); ++i) {
      req.messages.push_back({llm::Role::user, script[i]});
      req.messages.push_back({llm::Role::assistant, transcript[i].text});
    }
    freeform_start = std::min(script.size(), transcript.size());
  }

  std::deque<const Message*> window;
  for (std::size_t i = freeform_start; i < transcript.size(); ++i) {
    if (transcript[i].sender != Sender::system) window.push_back(&transcript[i]);
  }
  while (window.size() > options.window_messages) window.pop_front();

  std::size_t size = request_size(req);
  for (const auto* m : window) size += utf8_length(m->text);
  // Budget trimming never drops the newest user turn.
  const Message* last_user = nullptr;
  for (const auto* m : window) {
    if (m->sender == Sender::user) last_user = m;
  }
  while (window.size() > 1 && size > options.request_budget && window.front() != last_user) {
    size -= utf8_length(window.front()->text);
    window.pop_front();
  }
  // The exchange after the fixed prefix has to open with a user turn.
  while (window.size() > 1 && window.front()->sender == Sender::future_self) window.pop_front();

  for (const auto* m : window) {
    push_turn(req.messages, m->sender == Sender::user ? llm::Role::user : llm::Role::assistant, m->text);
  }
  return req;
}

ChatSession start_session(std::string session_id, PersonaContext persona, const llm::ChatBackend& backend,
                          const Clock& clock, const ChatOptions& options) {
  ChatSession s(std::move(session_id), std::move(persona), options);
  if (s.persona_.scripted()) {
    const auto& script = opening_script();
    for (std::size_t i = 0; i < script.size(); ++i) {
      llm::CompletionRequest req;
      req.system_context = s.persona_.system_context();
      req.temperature = options.temperature;
      req.max_output_tokens = options.max_output_tokens;
      for (std::size_t j = 0; j < i; ++j) {
        req.messages.push_back({llm::Role::user, script[j]});
        req.messages.push_back({llm::Role::assistant, s.transcript_[j].text});
      }
      req.messages.push_back({llm::Role::user, script[i]});
      s.append(Sender::future_self, request_reply(req, backend), clock);
    }
  }
  s.phase_ = Phase::freeform;
  return s;
}

Message post_user_message(ChatSession& session, std::string_view text, const llm::ChatBackend& backend,
                          const Clock& clock) {
  if (session.phase_ != Phase::freeform) throw SessionFinished();
  const std::string_view clean = trim(text);
  if (clean.empty()) throw EmptyMessage();
  session.append(Sender::user, std::string(clean), clock);
  std::string reply = request_reply(build_request(session), backend);
  return session.append(Sender::future_self, std::move(reply), clock);
}

Message retry_reply(ChatSession& session, const llm::ChatBackend& backend, const Clock& clock) {
  if (session.phase_ != Phase::freeform) throw SessionFinished();
  if (!session.reply_pending()) throw NoPendingReply();
  std::string reply = request_reply(build_request(session), backend);
  return session.append(Sender::future_self, std::move(reply), clock);
}

bool finish_eligibility(const ChatSession& session) {
  const auto& o = session.options();
  const int counted =
      o.counting == ExchangeCounting::messages ? session.exchanged_count() : session.exchanged_count() / 2;
  return counted >= o.finish_threshold;
}

ChatSession& finish_session(ChatSession& session, bool override_limits) {
  if (session.phase_ == Phase::finished) throw SessionFinished();
  if (!override_limits && !finish_eligibility(session)) {
    throw NotEligible(session.exchanged_count_, session.options_.finish_threshold);
  }
  session.phase_ = Phase::finished;
  return session;
}

}  // namespace futureyou::chat
