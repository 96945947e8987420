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

// An annotation session: pre-ordering, live Elo, the threshold controller and
// the routed MergeSort, driven one human judgment at a time.
//
// Every state transition is recorded as an event with a monotonically
// increasing sequence number:
//
//   session_created    initial order and threshold
//   request_issued     one per scheduled comparison (human or auto)
//   judgment_received  one per answered request (source human or auto)
//   threshold_cycled   cycle closed, new theta/accuracy
//   completed          final ranking
//
// The only non-derived inputs are the human judgment_received events. Given
// the config, items and similarities, re-submitting them in order rebuilds
// the session bit-for-bit; Replay() does that and checks the regenerated log
// against the recorded one.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hilsort/config.hpp"
#include "hilsort/error.hpp"
#include "hilsort/formats.hpp"
#include "hilsort/preorder.hpp"
#include "hilsort/rating.hpp"
#include "hilsort/sorter.hpp"
#include "json.hpp"

namespace hilsort {

struct SessionEvent {
  std::int64_t seq = 0;
  std::string type;
  json data;

  bool operator==(const SessionEvent&) const = default;
};

inline json to_json(const SessionEvent& e) {
  return {{"seq", e.seq}, {"type", e.type}, {"data", e.data}};
}

inline SessionEvent session_event_from_json(const json& j) {
  if (!j.is_object() || !j.contains("seq") || !j.contains("type") ||
      !j.contains("data") || !j["seq"].is_number_integer() ||
      !j["type"].is_string())
    throw InputError("malformed event record");
  return {j["seq"].get<std::int64_t>(), j["type"].get<std::string>(),
          j["data"]};
}

enum class SessionStatus { kActive, kCompleted };

inline std::string_view to_string(SessionStatus s) {
  return s == SessionStatus::kActive ? "active" : "completed";
}

struct RankingRow {
  int rank = 0;
  std::string item_id;
  std::string display_ref;
  double rating = 0.0;
  double initial_rating = 0.0;
  int bucket = 0;
};

class AnnotationSession {
 public:
  using EventSink = std::function<void(const SessionEvent&)>;

  static AnnotationSession Create(std::string session_id, SessionConfig config,
                                  std::vector<ItemRecord> items,
                                  SimilarityTable sims, EventSink sink = {}) {
    config.Validate();
    if (items.empty()) throw InputError("session needs at least one item");
    check_cross_references(items, sims);
    AnnotationSession s;
    s.id_ = std::move(session_id);
    s.config_ = std::move(config);
    s.items_ = std::move(items);
    s.sims_ = std::move(sims);
    s.sink_ = std::move(sink);
    s.pre_ = run_preorder(s.items_, s.sims_, s.config_.elo_init);
    s.elo_ = EloState(s.config_.k_factor);
    for (const auto& p : s.pre_) s.elo_.Add(p.item_id, p.initial_rating);
    s.ts_ = s.config_.InitialThreshold(s.items_.size());
    s.sorter_ = UncertaintySorter::Start(s.pre_);

    json order = json::array();
    for (std::size_t idx : s.sorter_.initial_order()) order.push_back(s.item_id(idx));
    s.Record("session_created",
             {{"session_id", s.id_},
              {"items", s.items_.size()},
              {"initial_order", std::move(order)},
              {"theta", current_threshold(s.ts_)},
              {"comparisons_total_estimate", s.ts_.comparisons_total_estimate}});
    s.Advance();
    return s;
  }

  // Rebuilds a session from its inputs and recorded log. The recorded log
  // may stop short (a crash after any flushed event); the regenerated log
  // must agree with every record it does contain.
  static AnnotationSession Replay(std::string session_id, SessionConfig config,
                                  std::vector<ItemRecord> items,
                                  SimilarityTable sims,
                                  const std::vector<SessionEvent>& log) {
    AnnotationSession s = Create(std::move(session_id), std::move(config),
                                 std::move(items), std::move(sims));
    for (const auto& e : log) {
      if (e.type != "judgment_received") continue;
      if (e.data.value("source", std::string{}) != "human") continue;
      const auto request_id = e.data.at("request_id").get<std::int64_t>();
      if (!s.sorter_.pending() ||
          s.sorter_.pending()->request_id != request_id)
        throw InputError("event log diverges: judgment for request " +
                         std::to_string(request_id) +
                         " does not match the regenerated schedule");
      s.PostJudgment(request_id,
                     parse_outcome(e.data.at("outcome").get<std::string>()),
                     e.data.value("timestamp_ms", std::int64_t{0}));
    }
    if (log.size() > s.events_.size())
      throw InputError("event log has records past the regenerated state");
    for (std::size_t i = 0; i < log.size(); ++i) {
      if (!(log[i] == s.events_[i]))
        throw InputError("event log diverges at seq " +
                         std::to_string(log[i].seq));
    }
    return s;
  }

  void set_sink(EventSink sink) { sink_ = std::move(sink); }

  // The outstanding human request, if any. Calling this repeatedly has no
  // side effects.
  const std::optional<ComparisonRequest>& pending() const {
    return sorter_.pending();
  }

  // Human answer to the pending request. The judgment event reaches the sink
  // before it is applied.
  void PostJudgment(std::int64_t request_id, Outcome outcome,
                    std::int64_t timestamp_ms = 0) {
    if (status() == SessionStatus::kCompleted)
      throw ConflictError("session is completed");
    if (!sorter_.pending() || sorter_.pending()->request_id != request_id)
      throw ConflictError("request " + std::to_string(request_id) +
                          " is not pending");
    Record("judgment_received",
           {{"request_id", request_id},
            {"outcome", std::string(to_string(outcome))},
            {"source", "human"},
            {"timestamp_ms", timestamp_ms}});
    sorter_.Submit({request_id, outcome, Route::kHuman, timestamp_ms}, elo_,
                   ts_, [this](const SortEvent& e) { OnSortEvent(e); });
    Advance();
  }

  SessionStatus status() const {
    return sorter_.done() ? SessionStatus::kCompleted : SessionStatus::kActive;
  }

  std::vector<RankingRow> Ranking() const {
    if (status() != SessionStatus::kCompleted)
      throw StateError("session is still active");
    std::vector<RankingRow> rows;
    const auto order = sorter_.Ranking();
    rows.reserve(order.size());
    for (std::size_t r = 0; r < order.size(); ++r) {
      const std::size_t idx = order[r];
      rows.push_back({static_cast<int>(r + 1), items_[idx].id,
                      items_[idx].display_ref, elo_.rating(idx),
                      pre_[idx].initial_rating, pre_[idx].bucket});
    }
    return rows;
  }

  json Stats() const {
    const auto& st = sorter_.stats();
    const double total = static_cast<double>(ts_.comparisons_total_estimate);
    json pending_id = sorter_.pending() ? json(sorter_.pending()->request_id)
                                        : json(nullptr);
    return {{"session_id", id_},
            {"status", std::string(to_string(status()))},
            {"items", items_.size()},
            {"human", st.human},
            {"auto", st.automatic},
            {"comparisons", st.total()},
            {"merges", st.merges},
            {"theta", current_threshold(ts_)},
            {"accuracy", ts_.accuracy},
            {"cycle", ts_.cycle},
            {"comparisons_total_estimate", ts_.comparisons_total_estimate},
            {"progress", total > 0.0 ? static_cast<double>(st.total()) / total
                                     : 1.0},
            {"pending_request_id", std::move(pending_id)},
            {"last_seq", events_.empty() ? 0 : events_.back().seq}};
  }

  json RequestJson(const ComparisonRequest& r) const {
    auto side = [&](std::size_t idx) {
      return json{{"id", items_[idx].id},
                  {"display_ref", items_[idx].display_ref},
                  {"rating", elo_.rating(idx)},
                  {"bucket", pre_[idx].bucket}};
    };
    return {{"request_id", r.request_id},
            {"left", side(r.left)},
            {"right", side(r.right)},
            {"route", std::string(to_string(r.route))},
            {"theta", r.theta},
            {"uncertainty", r.assessment.uncertainty},
            {"priority", r.assessment.priority}};
  }

  json Snapshot() const {
    json ratings = json::object();
    for (std::size_t i = 0; i < elo_.size(); ++i)
      ratings[elo_.id(i)] = elo_.rating(i);
    json sequence = json::array();
    for (std::size_t idx : sorter_.sequence()) sequence.push_back(item_id(idx));
    json preorder = json::array();
    for (const auto& p : pre_)
      preorder.push_back({{"item_id", p.item_id},
                          {"group_index", p.group_index},
                          {"depth", p.depth},
                          {"bucket", p.bucket},
                          {"confidence", p.confidence},
                          {"initial_rating", p.initial_rating}});
    const auto& m = sorter_.machine();
    return {{"stats", Stats()},
            {"ratings", std::move(ratings)},
            {"sequence", std::move(sequence)},
            {"merge_frame", m.frame_index()},
            {"merge_cursors", {m.left_cursor(), m.right_cursor()}},
            {"pending", sorter_.pending() ? RequestJson(*sorter_.pending())
                                          : json(nullptr)},
            {"preorder", std::move(preorder)}};
  }

  const std::string& id() const { return id_; }
  const SessionConfig& config() const { return config_; }
  const std::vector<ItemRecord>& items() const { return items_; }
  const SimilarityTable& similarities() const { return sims_; }
  const std::vector<PreorderResult>& preorder() const { return pre_; }
  const EloState& elo() const { return elo_; }
  const ThresholdState& threshold() const { return ts_; }
  const UncertaintySorter& sorter() const { return sorter_; }
  const std::vector<SessionEvent>& events() const { return events_; }
  const std::string& item_id(std::size_t idx) const { return items_[idx].id; }

 private:
  AnnotationSession() = default;

  void Record(std::string type, json data) {
    SessionEvent e{static_cast<std::int64_t>(events_.size()) + 1,
                   std::move(type), std::move(data)};
    if (sink_) sink_(e);
    events_.push_back(std::move(e));
  }

  void Advance() {
    sorter_.Next(elo_, pre_, ts_, config_.priority,
                 [this](const SortEvent& e) { OnSortEvent(e); });
  }

  void OnSortEvent(const SortEvent& ev) {
    if (const auto* issued = std::get_if<RequestIssued>(&ev)) {
      const auto& r = issued->request;
      Record("request_issued",
             {{"request_id", r.request_id},
              {"left", item_id(r.left)},
              {"right", item_id(r.right)},
              {"route", std::string(to_string(r.route))},
              {"theta", r.theta},
              {"uncertainty", r.assessment.uncertainty},
              {"priority", r.assessment.priority},
              {"p_left", r.assessment.p_left},
              {"cross_bucket", r.assessment.cross_bucket}});
    } else if (const auto* applied = std::get_if<JudgmentApplied>(&ev)) {
      // Human judgments were recorded before they were applied.
      if (applied->judgment.source == Route::kHuman) return;
      Record("judgment_received",
             {{"request_id", applied->judgment.request_id},
              {"outcome", std::string(to_string(applied->judgment.outcome))},
              {"source", "auto"}});
    } else if (const auto* cycled = std::get_if<ThresholdCycled>(&ev)) {
      Record("threshold_cycled", {{"cycle", cycled->cycle},
                                  {"theta", cycled->theta},
                                  {"accuracy", cycled->accuracy},
                                  {"comparisons_done", cycled->comparisons_done}});
    } else if (const auto* done = std::get_if<SortCompleted>(&ev)) {
      json ranking = json::array();
      for (std::size_t idx : done->ranking) ranking.push_back(item_id(idx));
      Record("completed", {{"ranking", std::move(ranking)}});
    }
  }

  std::string id_;
  SessionConfig config_;
  std::vector<ItemRecord> items_;
  SimilarityTable sims_;
  std::vector<PreorderResult> pre_;
  EloState elo_;
  ThresholdState ts_;
  UncertaintySorter sorter_;
  std::vector<SessionEvent> events_;
  EventSink sink_;
};

}  // namespace hilsort
