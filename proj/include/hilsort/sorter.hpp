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

#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hilsort/error.hpp"
#include "hilsort/merge_machine.hpp"
#include "hilsort/preorder.hpp"
#include "hilsort/rating.hpp"

namespace hilsort {

enum class Route { kHuman, kAuto };

inline std::string_view to_string(Route r) {
  return r == Route::kHuman ? "human" : "auto";
}

inline Route parse_route(std::string_view s) {
  if (s == "human") return Route::kHuman;
  if (s == "auto") return Route::kAuto;
  throw InputError("route must be human or auto", {std::string(s)});
}

struct ComparisonRequest {
  std::int64_t request_id = 0;
  std::size_t left = 0;
  std::size_t right = 0;
  PairAssessment assessment;
  Route route = Route::kHuman;
  double theta = 0.0;
  // What the live ratings predicted when the request was issued.
  Outcome predicted = Outcome::kLeftFirst;
};

struct Judgment {
  std::int64_t request_id = 0;
  Outcome outcome = Outcome::kLeftFirst;
  Route source = Route::kHuman;
  std::int64_t timestamp_ms = 0;
};

struct SortStats {
  std::int64_t human = 0;
  std::int64_t automatic = 0;
  std::int64_t merges = 0;

  std::int64_t total() const { return human + automatic; }
};

struct RequestIssued {
  ComparisonRequest request;
};

struct JudgmentApplied {
  Judgment judgment;
  bool agreed = false;
  double left_rating_after = 0.0;
  double right_rating_after = 0.0;
};

struct ThresholdCycled {
  std::int64_t cycle = 0;
  double theta = 0.0;
  double accuracy = 0.0;
  std::int64_t comparisons_done = 0;
};

struct SortCompleted {
  std::vector<std::size_t> ranking;
};

using SortEvent =
    std::variant<RequestIssued, JudgmentApplied, ThresholdCycled, SortCompleted>;
using SortEventSink = std::function<void(const SortEvent&)>;

// Auto route answer: the higher live rating goes first; an exact tie keeps
// the left-run element first.
inline Outcome predicted_outcome(const EloState& elo, std::size_t left,
                                 std::size_t right) {
  return elo.rating(left) >= elo.rating(right) ? Outcome::kLeftFirst
                                               : Outcome::kRightFirst;
}

// Uncertainty-routed MergeSort over item indices. Each scheduled pair is
// assessed against the live ratings; pairs whose uncertainty reaches the
// current threshold wait for a human judgment, the rest are decided on the
// spot by the ratings. Elo only moves on human answers.
class UncertaintySorter {
 public:
  struct Step {
    std::optional<ComparisonRequest> request;
    bool done = false;
  };

  UncertaintySorter() = default;

  // Initial working array: initial rating descending, id ascending on ties.
  static UncertaintySorter Start(const std::vector<PreorderResult>& pre) {
    if (pre.empty()) throw InputError("cannot sort an empty item set");
    std::vector<std::size_t> order(pre.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       if (pre[a].initial_rating != pre[b].initial_rating)
                         return pre[a].initial_rating > pre[b].initial_rating;
                       return pre[a].item_id < pre[b].item_id;
                     });
    UncertaintySorter s;
    s.initial_order_ = order;
    s.machine_ = MergeMachine<std::size_t>(std::move(order));
    return s;
  }

  // Advances through auto-resolved comparisons until a human request is
  // outstanding or the schedule is exhausted.
  Step Next(const EloState& elo, const std::vector<PreorderResult>& pre,
            ThresholdState& ts, const PriorityParams& priority = {},
            const SortEventSink& sink = {}) {
    if (pending_) throw StateError("a comparison is already pending");
    while (!machine_.done()) {
      const auto [left, right] = machine_.pending();
      ComparisonRequest req;
      req.request_id = next_request_id_++;
      req.left = left;
      req.right = right;
      req.assessment = assess_pair(left, right, elo, pre, priority);
      req.theta = current_threshold(ts);
      req.route = route_to_human(req.assessment.uncertainty, req.theta)
                      ? Route::kHuman
                      : Route::kAuto;
      req.predicted = predicted_outcome(elo, left, right);
      Emit(sink, RequestIssued{req});
      if (req.route == Route::kHuman) {
        pending_ = req;
        return {req, false};
      }
      Judgment j{req.request_id, req.predicted, Route::kAuto, 0};
      ++stats_.automatic;
      Emit(sink, JudgmentApplied{j, true, elo.rating(left), elo.rating(right)});
      Advance(j.outcome, ts, sink);
    }
    if (!completion_emitted_) {
      completion_emitted_ = true;
      Emit(sink, SortCompleted{machine_.sequence()});
    }
    return {std::nullopt, true};
  }

  // Applies the human answer to the pending request.
  void Submit(const Judgment& judgment, EloState& elo, ThresholdState& ts,
              const SortEventSink& sink = {}) {
    if (!pending_)
      throw ConflictError("no comparison is pending (request " +
                          std::to_string(judgment.request_id) + ")");
    if (judgment.request_id != pending_->request_id)
      throw ConflictError("request " + std::to_string(judgment.request_id) +
                          " is not the pending request " +
                          std::to_string(pending_->request_id));
    if (judgment.source != Route::kHuman)
      throw InputError("only human judgments can be submitted");
    const ComparisonRequest req = *pending_;
    pending_.reset();
    const bool agreed = judgment.outcome == req.predicted;
    elo_update(elo, req.left, req.right, judgment.outcome);
    ++stats_.human;
    ++ts.human_in_batch;
    if (agreed) ++ts.agreements_in_batch;
    Emit(sink, JudgmentApplied{judgment, agreed, elo.rating(req.left),
                               elo.rating(req.right)});
    Advance(judgment.outcome, ts, sink);
  }

  bool done() const { return machine_.done() && !pending_; }
  const std::optional<ComparisonRequest>& pending() const { return pending_; }
  const SortStats& stats() const { return stats_; }
  const std::vector<std::size_t>& initial_order() const {
    return initial_order_;
  }
  const std::vector<std::size_t>& sequence() const {
    return machine_.sequence();
  }
  const MergeMachine<std::size_t>& machine() const { return machine_; }
  std::int64_t next_request_id() const { return next_request_id_; }

  std::vector<std::size_t> Ranking() const {
    if (!done()) throw StateError("sort is not finished");
    return machine_.sequence();
  }

 private:
  static void Emit(const SortEventSink& sink, SortEvent e) {
    if (sink) sink(e);
  }

  // "equal" keeps the left element first.
  void Advance(Outcome outcome, ThresholdState& ts, const SortEventSink& sink) {
    const bool merged = machine_.resolve(outcome != Outcome::kRightFirst);
    if (merged) {
      ++stats_.merges;
      ++ts.merges_in_batch;
    }
    if (ts.human_in_batch >= ts.batch_size ||
        ts.merges_in_batch >= ts.merge_batch) {
      ts.comparisons_done = stats_.total();
      ts = update_threshold_cycle(ts, ts.human_in_batch,
                                  ts.agreements_in_batch);
      Emit(sink, ThresholdCycled{ts.cycle, current_threshold(ts), ts.accuracy,
                                 ts.comparisons_done});
    }
  }

  MergeMachine<std::size_t> machine_;
  std::vector<std::size_t> initial_order_;
  std::optional<ComparisonRequest> pending_;
  SortStats stats_;
  std::int64_t next_request_id_ = 1;
  bool completion_emitted_ = false;
};

}  // namespace hilsort
