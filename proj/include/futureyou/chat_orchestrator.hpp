#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "futureyou/error.hpp"
#include "futureyou/llm_gateway.hpp"
#include "futureyou/memory_engine.hpp"
#include "futureyou/time_util.hpp"
#include "json.hpp"

namespace futureyou::chat {

enum class Sender { user, future_self, system };
enum class Phase { opening_script, freeform, finished };

std::string_view to_string(Sender s);
Sender sender_from_string(std::string_view s);
std::string_view to_string(Phase p);

// The four scripted prompts that open every future-self conversation.
const std::vector<std::string>& opening_script();

struct PersonaContext {
  // Absent for the generic assistant used by the chat control condition.
  std::optional<memory::FutureMemory> memory;
  std::string persona_instruction;
  std::string aged_portrait_ref;

  static PersonaContext future_self(memory::FutureMemory memory, std::string aged_portrait_ref);
  static PersonaContext generic_assistant();

  bool scripted() const { return memory.has_value(); }
  // persona_instruction, then the assembled backstory.
  std::string system_context() const;
  // Throws InvalidPersona.
  void validate() const;

  bool operator==(const PersonaContext&) const = default;
};

std::string future_self_instruction(std::string_view name, int present_age);
extern const std::string_view kGenericAssistantInstruction;

nlohmann::json to_json(const PersonaContext& persona);
PersonaContext persona_from_json(const nlohmann::json& j);

struct Message {
  Sender sender = Sender::user;
  std::string text;
  TimePoint timestamp{};
  int index = 0;

  bool operator==(const Message&) const = default;
};

// One JSONL line of the session transcript log.
nlohmann::json to_json(const Message& m, std::string_view session_id);
Message message_from_json(const nlohmann::json& j);

enum class ExchangeCounting {
  messages,  // each non-system message counts once
  pairs,     // a user message plus its reply counts once
};

struct ChatOptions {
  int finish_threshold = 16;
  ExchangeCounting counting = ExchangeCounting::messages;
  std::size_t window_messages = 20;   // freeform messages kept in the request
  std::size_t request_budget = 24000;  // code points across context and messages
  double temperature = llm::kChatTemperature;
  int max_output_tokens = 300;
};

class InvalidPersona : public Error {
 public:
  using Error::Error;
};
class SessionFinished : public Error {
 public:
  SessionFinished() : Error("the chat session has finished") {}
};
class EmptyMessage : public Error {
 public:
  EmptyMessage() : Error("message is empty") {}
};
class NotEligible : public Error {
 public:
  NotEligible(int exchanged, int needed)
      : Error("finishing needs " + std::to_string(needed) + " exchanged messages, have " + std::to_string(exchanged)) {}
};
class NoPendingReply : public Error {
 public:
  NoPendingReply() : Error("there is no failed reply to retry") {}
};
class BackendError : public Error {
 public:
  using Error::Error;
};

class ChatSession {
 public:
  const std::string& id() const { return id_; }
  const PersonaContext& persona() const { return persona_; }
  const std::vector<Message>& transcript() const { return transcript_; }
  Phase phase() const { return phase_; }
  int exchanged_count() const { return exchanged_count_; }
  const ChatOptions& options() const { return options_; }
  // The last user message has no reply yet (its generation failed).
  bool reply_pending() const;

  // Rebuilds a session from its persisted transcript.
  static ChatSession replay(std::string id, PersonaContext persona, std::vector<Message> transcript, bool finished,
                            ChatOptions options = {});

 private:
  ChatSession(std::string id, PersonaContext persona, ChatOptions options);

  Message& append(Sender sender, std::string text, const Clock& clock);

  std::string id_;
  PersonaContext persona_;
  ChatOptions options_;
  std::vector<Message> transcript_;
  Phase phase_ = Phase::opening_script;
  int exchanged_count_ = 0;

  friend ChatSession start_session(std::string, PersonaContext, const llm::ChatBackend&, const Clock&,
                                   const ChatOptions&);
  friend Message post_user_message(ChatSession&, std::string_view, const llm::ChatBackend&, const Clock&);
  friend Message retry_reply(ChatSession&, const llm::ChatBackend&, const Clock&);
  friend ChatSession& finish_session(ChatSession&, bool);
};

// Scripted personas answer the four openers (sequentially, each seeing the
// previous answers) and land in freeform with four messages. The generic
// assistant starts empty. Throws BackendError; nothing is returned then.
ChatSession start_session(std::string session_id, PersonaContext persona, const llm::ChatBackend& backend,
                          const Clock& clock, const ChatOptions& options = {});

// Appends the user's message and the reply. On backend failure the user
// message stays in the transcript and BackendError is thrown; retry_reply
// regenerates the missing answer.
Message post_user_message(ChatSession& session, std::string_view text, const llm::ChatBackend& backend,
                          const Clock& clock);
Message retry_reply(ChatSession& session, const llm::ChatBackend& backend, const Clock& clock);

bool finish_eligibility(const ChatSession& session);

// `override_limits` is the harness path for the maximum session time.
ChatSession& finish_session(ChatSession& session, bool override_limits = false);

// Request that would be sent for the current transcript: persona context,
// opener exchanges, then the newest freeform turns that fit the window and
// budget. Consecutive same-role turns are merged.
llm::CompletionRequest build_request(const ChatSession& session);

}  // namespace futureyou::chat
