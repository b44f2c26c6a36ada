#include "futureyou/service/event_store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

namespace futureyou::service {
namespace {

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto nl = text.find('\n', start);
    if (nl == std::string::npos) break;  // unterminated tail: a torn write
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

void check_id(const std::string& id) {
  if (!valid_session_id(id)) throw StorageError("invalid session id '" + id + "'");
}

nlohmann::json index_json(const IndexEntry& e) {
  return {{"session_id", e.session_id}, {"condition", e.condition}, {"created_at", to_rfc3339(e.created_at)}};
}

}  // namespace

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::survey_submitted:
      return "survey_submitted";
    case EventKind::portrait_uploaded:
      return "portrait_uploaded";
    case EventKind::backstory_ready:
      return "backstory_ready";
    case EventKind::message:
      return "message";
    case EventKind::stage_change:
      return "stage_change";
  }
  return "stage_change";
}

EventKind event_kind_from_string(std::string_view s) {
  for (auto k : {EventKind::survey_submitted, EventKind::portrait_uploaded, EventKind::backstory_ready,
                 EventKind::message, EventKind::stage_change}) {
    if (to_string(k) == s) return k;
  }
  throw StorageError("unknown event kind '" + std::string(s) + "'");
}

nlohmann::json to_json(const EventLogEntry& e) {
  return {{"session_id", e.session_id},
          {"sequence", e.sequence},
          {"kind", to_string(e.kind)},
          {"payload", e.payload},
          {"timestamp", to_rfc3339(e.timestamp)}};
}

EventLogEntry event_from_json(const nlohmann::json& j) {
  try {
    return {j.at("session_id").get<std::string>(), j.at("sequence").get<std::int64_t>(),
            event_kind_from_string(j.at("kind").get<std::string>()), j.at("payload"),
            parse_rfc3339(j.at("timestamp").get<std::string>())};
  } catch (const nlohmann::json::exception& e) {
    throw StorageError(std::string("malformed event: ") + e.what());
  } catch (const TimeFormatError& e) {
    throw StorageError(std::string("malformed event timestamp: ") + e.what());
  }
}

bool valid_session_id(std::string_view id) {
  if (id.empty() || id.size() > 64) return false;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
    if (!ok) return false;
  }
  return true;
}

void MemoryEventStore::create(const IndexEntry& entry, const EventLogEntry& first) {
  check_id(entry.session_id);
  std::lock_guard lock(mu_);
  if (logs_.count(entry.session_id)) throw StorageError("session '" + entry.session_id + "' already exists");
  index_.push_back(entry);
  logs_[entry.session_id].push_back(first);
}

void MemoryEventStore::append(const EventLogEntry& entry) {
  std::lock_guard lock(mu_);
  auto it = logs_.find(entry.session_id);
  if (it == logs_.end()) throw StorageError("unknown session '" + entry.session_id + "'");
  if (!it->second.empty() && entry.sequence <= it->second.back().sequence) {
    throw StorageError("sequence " + std::to_string(entry.sequence) + " does not advance the log");
  }
  it->second.push_back(entry);
}

std::vector<EventLogEntry> MemoryEventStore::read(const std::string& session_id) const {
  std::lock_guard lock(mu_);
  auto it = logs_.find(session_id);
  return it == logs_.end() ? std::vector<EventLogEntry>{} : it->second;
}

std::vector<IndexEntry> MemoryEventStore::index() const {
  std::lock_guard lock(mu_);
  return index_;
}

FileEventStore::FileEventStore(std::filesystem::path dir, bool fsync) : dir_(std::move(dir)), fsync_(fsync) {
  std::error_code ec;
  std::filesystem::create_directories(dir_ / "sessions", ec);
  if (ec) throw StorageError("cannot create " + (dir_ / "sessions").string() + ": " + ec.message());
}

std::filesystem::path FileEventStore::log_path(const std::string& session_id) const {
  return dir_ / "sessions" / (session_id + ".jsonl");
}

void FileEventStore::append_line(const std::filesystem::path& path, const std::string& line) const {
  const int fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) throw StorageError("cannot open " + path.string() + ": " + std::strerror(errno));
  // One write() per entry keeps appends atomic with respect to readers.
  const ssize_t n = ::write(fd, line.data(), line.size());
  const int write_errno = errno;
  bool ok = n == static_cast<ssize_t>(line.size());
  if (ok && fsync_) ok = ::fsync(fd) == 0;
  ::close(fd);
  if (!ok) {
    throw StorageError("append to " + path.string() + " failed: " + std::strerror(n < 0 ? write_errno : EIO));
  }
}

void FileEventStore::create(const IndexEntry& entry, const EventLogEntry& first) {
  check_id(entry.session_id);
  std::lock_guard lock(mu_);
  const auto path = log_path(entry.session_id);
  if (std::filesystem::exists(path)) throw StorageError("session '" + entry.session_id + "' already exists");
  append_line(path, to_json(first).dump() + "\n");
  try {
    append_line(dir_ / "index.jsonl", index_json(entry).dump() + "\n");
  } catch (const StorageError&) {
    std::error_code ec;
    std::filesystem::remove(path, ec);
    throw;
  }
  last_sequence_[entry.session_id] = first.sequence;
}

void FileEventStore::append(const EventLogEntry& entry) {
  check_id(entry.session_id);
  std::lock_guard lock(mu_);
  const auto path = log_path(entry.session_id);
  auto it = last_sequence_.find(entry.session_id);
  if (it == last_sequence_.end()) {
    if (!std::filesystem::exists(path)) throw StorageError("unknown session '" + entry.session_id + "'");
    auto lines = read_lines(path);
    std::int64_t last = -1;
    if (!lines.empty()) last = event_from_json(nlohmann::json::parse(lines.back())).sequence;
    it = last_sequence_.emplace(entry.session_id, last).first;
  }
  if (entry.sequence <= it->second) {
    throw StorageError("sequence " + std::to_string(entry.sequence) + " does not advance the log");
  }
  append_line(path, to_json(entry).dump() + "\n");
  it->second = entry.sequence;
}

std::vector<EventLogEntry> FileEventStore::read(const std::string& session_id) const {
  check_id(session_id);
  std::lock_guard lock(mu_);
  std::vector<EventLogEntry> out;
  for (const auto& line : read_lines(log_path(session_id))) {
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw StorageError("corrupt line in log of session '" + session_id + "'");
    out.push_back(event_from_json(j));
  }
  return out;
}

std::vector<IndexEntry> FileEventStore::index() const {
  std::lock_guard lock(mu_);
  std::vector<IndexEntry> out;
  for (const auto& line : read_lines(dir_ / "index.jsonl")) {
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw StorageError("corrupt line in session index");
    try {
      IndexEntry e{j.at("session_id").get<std::string>(), j.at("condition").get<std::string>(),
                   parse_rfc3339(j.at("created_at").get<std::string>())};
      // A crash between the two writes of create() can leave an index
      // line without a log; such sessions never existed.
      if (std::filesystem::exists(log_path(e.session_id))) out.push_back(std::move(e));
    } catch (const std::exception& e) {
      throw StorageError(std::string("malformed index entry: ") + e.what());
    }
  }
  return out;
}

}  // namespace futureyou::service
