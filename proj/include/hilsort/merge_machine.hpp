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

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "hilsort/error.hpp"

namespace hilsort {

// One merge of two adjacent sorted runs [lo, mid) and [mid, hi).
struct MergeFrame {
  std::size_t lo = 0;
  std::size_t mid = 0;
  std::size_t hi = 0;
};

// The frames recursive top-down MergeSort executes, in execution order
// (post-order over the split tree, left half = floor(n/2)). The plan does
// not depend on comparison outcomes, only the comparisons inside each frame do.
inline std::vector<MergeFrame> top_down_merge_plan(std::size_t n) {
  std::vector<MergeFrame> plan;
  if (n < 2) return plan;
  plan.reserve(n - 1);
  struct Pending {
    std::size_t lo, hi;
    bool expanded;
  };
  std::vector<Pending> stack{{0, n, false}};
  while (!stack.empty()) {
    Pending top = stack.back();
    stack.pop_back();
    if (top.hi - top.lo < 2) continue;
    const std::size_t mid = top.lo + (top.hi - top.lo) / 2;
    if (top.expanded) {
      plan.push_back({top.lo, mid, top.hi});
      continue;
    }
    stack.push_back({top.lo, top.hi, true});
    stack.push_back({mid, top.hi, false});
    stack.push_back({top.lo, mid, false});
  }
  return plan;
}

// Worst-case comparison count of top-down MergeSort:
// n*ceil(log2 n) - 2^ceil(log2 n) + 1.
inline std::int64_t merge_sort_worst_case(std::int64_t n) {
  if (n < 2) return 0;
  std::int64_t levels = 0;
  while ((std::int64_t{1} << levels) < n) ++levels;
  return n * levels - (std::int64_t{1} << levels) + 1;
}

// Pausable top-down MergeSort. The caller pulls the pending pair, decides
// it however it likes (a person, a model, a lookup), and feeds the answer
// back with resolve(). `left_first == true` keeps the left-run element ahead.
// The sequence of pairs is exactly the one recursive MergeSort would ask.
template <typename T>
class MergeMachine {
 public:
  MergeMachine() = default;

  explicit MergeMachine(std::vector<T> initial)
      : sequence_(std::move(initial)),
        plan_(top_down_merge_plan(sequence_.size())) {
    Prime();
  }

  bool done() const { return frame_ >= plan_.size(); }

  // Elements being compared: (left-run head, right-run head).
  std::pair<const T&, const T&> pending() const {
    if (done()) throw StateError("merge sort already finished");
    const MergeFrame& f = plan_[frame_];
    return {sequence_[f.lo + left_], sequence_[f.mid + right_]};
  }

  // Returns true when this answer completed a merge frame.
  bool resolve(bool left_first) {
    if (done()) throw StateError("merge sort already finished");
    const MergeFrame& f = plan_[frame_];
    ++comparisons_;
    if (left_first) {
      buffer_.push_back(sequence_[f.lo + left_++]);
    } else {
      buffer_.push_back(sequence_[f.mid + right_++]);
    }
    const bool left_exhausted = f.lo + left_ == f.mid;
    const bool right_exhausted = f.mid + right_ == f.hi;
    if (!left_exhausted && !right_exhausted) return false;

    for (std::size_t k = f.lo + left_; k < f.mid; ++k)
      buffer_.push_back(sequence_[k]);
    for (std::size_t k = f.mid + right_; k < f.hi; ++k)
      buffer_.push_back(sequence_[k]);
    std::move(buffer_.begin(), buffer_.end(), sequence_.begin() + f.lo);
    ++frame_;
    Prime();
    return true;
  }

  // Working array; the final order once done().
  const std::vector<T>& sequence() const { return sequence_; }
  const std::vector<MergeFrame>& plan() const { return plan_; }
  std::size_t frame_index() const { return frame_; }
  std::size_t left_cursor() const { return left_; }
  std::size_t right_cursor() const { return right_; }
  std::size_t merges_completed() const { return frame_; }
  std::int64_t comparisons() const { return comparisons_; }

 private:
  void Prime() {
    left_ = 0;
    right_ = 0;
    buffer_.clear();
    if (!done()) buffer_.reserve(plan_[frame_].hi - plan_[frame_].lo);
  }

  std::vector<T> sequence_;
  std::vector<MergeFrame> plan_;
  std::size_t frame_ = 0;
  std::size_t left_ = 0;
  std::size_t right_ = 0;
  std::vector<T> buffer_;
  std::int64_t comparisons_ = 0;
};

}  // namespace hilsort
