// Copyright 2026 The hilsort Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Durable session store. Layout per session:
//
//   <data_dir>/<session_id>/config.json    config, items and similarities
//   <data_dir>/<session_id>/events.log     one JSON event per line, fsync'd
//   <data_dir>/<session_id>/snapshot.json  derived state after the last op
//
// events.log is the source of truth. A session that is not in memory is
// rebuilt by replaying it; a torn final line (crash mid-write) is dropped.
// All operations on one session run under that session's mutex.

#pragma once

#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hilsort/config.hpp"
#include "hilsort/error.hpp"
#include "hilsort/formats.hpp"
#include "hilsort/session.hpp"
#include "json.hpp"

namespace hilsort {

namespace fs = std::filesystem;

inline constexpr std::string_view kExportFormat = "hilsort-session";
inline constexpr int kExportVersion = 1;

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw NotFoundError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes to a sibling temp file, fsyncs, then renames over the target.
inline void write_file_atomic(const fs::path& p, const std::string& content) {
  const fs::path tmp = p.string() + ".tmp";
  std::FILE* f = std::fopen(tmp.c_str(), "wb");
  if (!f) throw std::runtime_error("cannot write " + tmp.string());
  const bool ok = std::fwrite(content.data(), 1, content.size(), f) ==
                      content.size() &&
                  std::fflush(f) == 0 && ::fsync(::fileno(f)) == 0;
  std::fclose(f);
  if (!ok) throw std::runtime_error("short write to " + tmp.string());
  fs::rename(tmp, p);
}

// Append-only line log; every line is flushed and fsync'd before Append
// returns.
class AppendLog {
 public:
  AppendLog() = default;
  explicit AppendLog(const fs::path& p) : file_(std::fopen(p.c_str(), "ab")) {
    if (!file_) throw std::runtime_error("cannot open " + p.string());
  }
  AppendLog(const AppendLog&) = delete;
  AppendLog& operator=(const AppendLog&) = delete;
  AppendLog(AppendLog&& o) noexcept : file_(std::exchange(o.file_, nullptr)) {}
  AppendLog& operator=(AppendLog&& o) noexcept {
    if (this != &o) {
      Close();
      file_ = std::exchange(o.file_, nullptr);
    }
    return *this;
  }
  ~AppendLog() { Close(); }

  void Append(const std::string& line) {
    if (!file_) throw std::runtime_error("event log is not open");
    const std::string rec = line + '\n';
    if (std::fwrite(rec.data(), 1, rec.size(), file_) != rec.size() ||
        std::fflush(file_) != 0 || ::fsync(::fileno(file_)) != 0)
      throw std::runtime_error("failed to persist event");
  }

 private:
  void Close() {
    if (file_) std::fclose(file_);
    file_ = nullptr;
  }
  std::FILE* file_ = nullptr;
};

// Parses events.log. Only the final line may be torn.
inline std::vector<SessionEvent> parse_event_log(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) lines.push_back(line);
  std::vector<SessionEvent> events;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    json j = json::parse(lines[i], nullptr, false);
    if (j.is_discarded()) {
      if (i + 1 == lines.size()) break;
      throw InputError("corrupt event log at line " + std::to_string(i + 1));
    }
    events.push_back(session_event_from_json(j));
    if (events.back().seq != static_cast<std::int64_t>(events.size()))
      throw InputError("event log sequence gap at line " + std::to_string(i + 1));
  }
  return events;
}

inline bool valid_session_id(std::string_view id) {
  if (id.empty() || id.size() > 64) return false;
  for (char c : id)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_'))
      return false;
  return true;
}

inline json ranking_to_json(const std::vector<RankingRow>& rows) {
  json out = json::array();
  for (const auto& r : rows)
    out.push_back({{"rank", r.rank},
                   {"item_id", r.item_id},
                   {"display_ref", r.display_ref},
                   {"rating", r.rating},
                   {"initial_rating", r.initial_rating},
                   {"bucket", r.bucket}});
  return out;
}

inline json items_to_json(const std::vector<ItemRecord>& items) {
  json out = json::array();
  for (const auto& item : items)
    out.push_back({{"id", item.id},
                   {"display_ref", item.display_ref},
                   {"ground_truth", item.ground_truth ? json(*item.ground_truth)
                                                      : json(nullptr)}});
  return out;
}

// Accepts either a JSON array of item objects or a JSONL string.
inline std::vector<ItemRecord> items_from_json(const json& j) {
  if (j.is_string()) return parse_items_jsonl(j.get<std::string>());
  if (!j.is_array()) throw InputError("items must be an array or a JSONL string");
  std::string jsonl;
  for (const auto& item : j) jsonl += item.dump() + '\n';
  return parse_items_jsonl(jsonl);
}

class SessionStore {
 public:
  using Clock = std::function<std::int64_t()>;

  explicit SessionStore(fs::path data_dir, Clock clock = {})
      : root_(std::move(data_dir)), clock_(std::move(clock)) {
    fs::create_directories(root_);
    if (!clock_) {
      clock_ = [] {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::system_clock::now().time_since_epoch())
            .count();
      };
    }
  }

  const fs::path& data_dir() const { return root_; }

  std::string Create(const std::vector<ItemRecord>& items,
                     const SimilarityTable& sims, const SessionConfig& config,
                     std::optional<std::string> requested_id = std::nullopt) {
    const std::string id = requested_id ? *requested_id : NewId();
    if (!valid_session_id(id))
      throw InputError("session id must match [A-Za-z0-9_-]{1,64}", {id});
    auto entry = std::make_shared<Entry>();
    std::lock_guard entry_lock(entry->mu);
    {
      std::lock_guard lock(mu_);
      if (sessions_.contains(id) || fs::exists(root_ / id))
        throw ConflictError("session '" + id + "' already exists");
      sessions_.emplace(id, entry);
    }
    try {
      auto session = AnnotationSession::Create(id, config, items, sims);
      const fs::path dir = root_ / id;
      fs::create_directories(dir);
      write_file_atomic(dir / "config.json",
                        SessionInputs(id, config, items, sims).dump());
      Install(*entry, std::move(session), dir);
    } catch (...) {
      std::lock_guard lock(mu_);
      sessions_.erase(id);
      throw;
    }
    return id;
  }

  std::string Create(const std::string& items_jsonl, const json& similarities,
                     const json& config,
                     std::optional<std::string> requested_id = std::nullopt) {
    return Create(parse_items_jsonl(items_jsonl), parse_similarities(similarities),
                  session_config_from_json(config), std::move(requested_id));
  }

  // The pending human request, or a completion notice.
  json Next(const std::string& id) {
    auto entry = Acquire(id);
    std::lock_guard lock(entry->mu);
    const auto& s = *entry->session;
    if (s.status() == SessionStatus::kCompleted)
      return {{"done", true},
              {"session_id", id},
              {"ranking_url", "/v1/sessions/" + id + "/ranking"}};
    return {{"done", false}, {"request", s.RequestJson(*s.pending())}};
  }

  json PostJudgment(const std::string& id, std::int64_t request_id,
                    Outcome outcome) {
    auto entry = Acquire(id);
    std::lock_guard lock(entry->mu);
    auto& s = *entry->session;
    s.PostJudgment(request_id, outcome, clock_());
    WriteSnapshot(*entry);
    return {{"accepted", true}, {"request_id", request_id}, {"stats", s.Stats()}};
  }

  json Stats(const std::string& id) {
    auto entry = Acquire(id);
    std::lock_guard lock(entry->mu);
    return entry->session->Stats();
  }

  json Ranking(const std::string& id) {
    auto entry = Acquire(id);
    std::lock_guard lock(entry->mu);
    return {{"session_id", id},
            {"ranking", ranking_to_json(entry->session->Ranking())}};
  }

  json Export(const std::string& id) {
    auto entry = Acquire(id);
    std::lock_guard lock(entry->mu);
    const auto& s = *entry->session;
    json events = json::array();
    for (const auto& e : s.events()) events.push_back(to_json(e));
    json doc = SessionInputs(id, s.config(), s.items(), s.similarities());
    doc["format"] = kExportFormat;
    doc["version"] = kExportVersion;
    doc["events"] = std::move(events);
    doc["snapshot"] = s.Snapshot();
    return doc;
  }

  // Rebuilds an exported session under its own id (or `as_id`).
  std::string Import(const json& doc, std::optional<std::string> as_id = std::nullopt) {
    if (!doc.is_object() || doc.value("format", std::string{}) != kExportFormat)
      throw InputError("not a session export document");
    const std::string id =
        as_id ? *as_id : doc.value("session_id", std::string{});
    if (!valid_session_id(id))
      throw InputError("session id must match [A-Za-z0-9_-]{1,64}", {id});
    auto config = session_config_from_json(doc.at("config"));
    auto items = items_from_json(doc.at("items"));
    auto sims = parse_similarities(doc.at("similarities"));
    std::vector<SessionEvent> log;
    for (const auto& e : doc.value("events", json::array()))
      log.push_back(session_event_from_json(e));
    // Importing under a new id re-keys the creation record.
    if (!log.empty() && log.front().type == "session_created" &&
        log.front().data.is_object() && log.front().data.contains("session_id"))
      log.front().data["session_id"] = id;

    auto entry = std::make_shared<Entry>();
    std::lock_guard entry_lock(entry->mu);
    {
      std::lock_guard lock(mu_);
      if (sessions_.contains(id) || fs::exists(root_ / id))
        throw ConflictError("session '" + id + "' already exists");
      sessions_.emplace(id, entry);
    }
    try {
      auto session = AnnotationSession::Replay(id, config, items, sims, log);
      const fs::path dir = root_ / id;
      fs::create_directories(dir);
      write_file_atomic(dir / "config.json",
                        SessionInputs(id, config, items, sims).dump());
      Install(*entry, std::move(session), dir);
    } catch (...) {
      std::lock_guard lock(mu_);
      sessions_.erase(id);
      throw;
    }
    return id;
  }

  std::string DisplayRef(const std::string& id, const std::string& item_id) {
    auto entry = Acquire(id);
    std::lock_guard lock(entry->mu);
    for (const auto& item : entry->session->items())
      if (item.id == item_id) return item.display_ref;
    throw NotFoundError("no item '" + item_id + "' in session '" + id + "'");
  }

  std::vector<std::string> List() const {
    std::vector<std::string> ids;
    for (const auto& d : fs::directory_iterator(root_))
      if (d.is_directory() && fs::exists(d.path() / "config.json"))
        ids.push_back(d.path().filename().string());
    std::sort(ids.begin(), ids.end());
    return ids;
  }

  // Drops the in-memory copy; the next access replays from disk.
  void Evict(const std::string& id) {
    std::lock_guard lock(mu_);
    sessions_.erase(id);
  }

 private:
  struct Entry {
    std::mutex mu;
    std::optional<AnnotationSession> session;
    AppendLog log;
  };

  static json SessionInputs(const std::string& id, const SessionConfig& config,
                            const std::vector<ItemRecord>& items,
                            const SimilarityTable& sims) {
    return {{"session_id", id},
            {"config", to_json(config)},
            {"items", items_to_json(items)},
            {"similarities", similarities_to_json(sims)}};
  }

  std::string NewId() {
    std::lock_guard lock(mu_);
    std::random_device rd;
    std::uniform_int_distribution<int> hex(0, 15);
    while (true) {
      std::string id;
      for (int i = 0; i < 16; ++i) id += "0123456789abcdef"[hex(rd)];
      if (!sessions_.contains(id) && !fs::exists(root_ / id)) return id;
    }
  }

  std::shared_ptr<Entry> Acquire(const std::string& id) {
    if (!valid_session_id(id)) throw NotFoundError("unknown session '" + id + "'");
    std::shared_ptr<Entry> entry;
    bool load = false;
    {
      std::lock_guard lock(mu_);
      auto it = sessions_.find(id);
      if (it != sessions_.end()) {
        entry = it->second;
      } else {
        if (!fs::exists(root_ / id / "config.json"))
          throw NotFoundError("unknown session '" + id + "'");
        entry = std::make_shared<Entry>();
        sessions_.emplace(id, entry);
        load = true;
      }
    }
    if (load) {
      std::lock_guard entry_lock(entry->mu);
      try {
        LoadFromDisk(id, *entry);
      } catch (...) {
        std::lock_guard lock(mu_);
        sessions_.erase(id);
        throw;
      }
    } else {
      // Another thread may still be loading it.
      std::lock_guard entry_lock(entry->mu);
      if (!entry->session) throw NotFoundError("session '" + id + "' failed to load");
    }
    return entry;
  }

  void LoadFromDisk(const std::string& id, Entry& entry) {
    const fs::path dir = root_ / id;
    const json inputs = json::parse(read_file(dir / "config.json"));
    auto config = session_config_from_json(inputs.at("config"));
    auto items = items_from_json(inputs.at("items"));
    auto sims = parse_similarities(inputs.at("similarities"));
    std::vector<SessionEvent> log;
    if (fs::exists(dir / "events.log"))
      log = parse_event_log(read_file(dir / "events.log"));
    auto session = AnnotationSession::Replay(id, config, items, sims, log);
    Install(entry, std::move(session), dir);
  }

  // Rewrites events.log with the full regenerated log, then attaches the
  // write-ahead sink.
  void Install(Entry& entry, AnnotationSession session, const fs::path& dir) {
    std::string all;
    for (const auto& e : session.events()) all += to_json(e).dump() + '\n';
    entry.log = AppendLog();
    write_file_atomic(dir / "events.log", all);
    entry.log = AppendLog(dir / "events.log");
    Entry* e = &entry;
    session.set_sink([e](const SessionEvent& ev) {
      e->log.Append(to_json(ev).dump());
    });
    entry.session.emplace(std::move(session));
    WriteSnapshot(entry);
  }

  void WriteSnapshot(const Entry& entry) const {
    const auto& s = *entry.session;
    write_file_atomic(root_ / s.id() / "snapshot.json", s.Snapshot().dump(2));
  }

  fs::path root_;
  Clock clock_;
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
};

}  // namespace hilsort
