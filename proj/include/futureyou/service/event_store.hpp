#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "futureyou/error.hpp"
#include "futureyou/time_util.hpp"
#include "json.hpp"

namespace futureyou::service {

enum class EventKind { survey_submitted, portrait_uploaded, backstory_ready, message, stage_change };

std::string_view to_string(EventKind k);
EventKind event_kind_from_string(std::string_view s);

struct EventLogEntry {
  std::string session_id;
  std::int64_t sequence = 0;
  EventKind kind = EventKind::stage_change;
  nlohmann::json payload;
  TimePoint timestamp{};

  bool operator==(const EventLogEntry&) const = default;
};

// One JSONL line: {"session_id","sequence","kind","payload","timestamp"}.
nlohmann::json to_json(const EventLogEntry& e);
EventLogEntry event_from_json(const nlohmann::json& j);

struct IndexEntry {
  std::string session_id;
  std::string condition;
  TimePoint created_at{};

  bool operator==(const IndexEntry&) const = default;
};

class StorageError : public Error {
 public:
  using Error::Error;
};

// Append-only per-session logs plus an index of sessions. Implementations
// are thread-safe; each append is atomic.
class EventStore {
 public:
  virtual ~EventStore() = default;
  // Registers a session together with its first event; all or nothing.
  virtual void create(const IndexEntry& entry, const EventLogEntry& first) = 0;
  // Sequence numbers must strictly increase within a session.
  virtual void append(const EventLogEntry& entry) = 0;
  virtual std::vector<EventLogEntry> read(const std::string& session_id) const = 0;
  // Sessions in creation order.
  virtual std::vector<IndexEntry> index() const = 0;
};

class MemoryEventStore final : public EventStore {
 public:
  void create(const IndexEntry& entry, const EventLogEntry& first) override;
  void append(const EventLogEntry& entry) override;
  std::vector<EventLogEntry> read(const std::string& session_id) const override;
  std::vector<IndexEntry> index() const override;

 private:
  mutable std::mutex mu_;
  std::vector<IndexEntry> index_;
  std::map<std::string, std::vector<EventLogEntry>> logs_;
};

// Layout under `dir`: index.jsonl and sessions/<session_id>.jsonl. A torn
// final line (crash mid-append) is ignored on read.
class FileEventStore final : public EventStore {
 public:
  explicit FileEventStore(std::filesystem::path dir, bool fsync = true);

  void create(const IndexEntry& entry, const EventLogEntry& first) override;
  void append(const EventLogEntry& entry) override;
  std::vector<EventLogEntry> read(const std::string& session_id) const override;
  std::vector<IndexEntry> index() const override;

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path log_path(const std::string& session_id) const;
  void append_line(const std::filesystem::path& path, const std::string& line) const;

  std::filesystem::path dir_;
  bool fsync_;
  mutable std::mutex mu_;
  std::map<std::string, std::int64_t> last_sequence_;
};

// Session ids are used as file names, so only [A-Za-z0-9_-] is accepted.
bool valid_session_id(std::string_view id);

}  // namespace futureyou::service
