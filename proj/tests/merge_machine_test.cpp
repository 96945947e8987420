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

#include "hilsort/merge_machine.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <utility>
#include <vector>

#include "hilsort/rng.hpp"

namespace hilsort {
namespace {

using Pair = std::pair<int, int>;

// Independent reference: textbook recursive top-down MergeSort that logs
// each comparison.
void reference_sort(std::vector<int>& v, std::size_t lo, std::size_t hi,
                    const std::function<bool(int, int)>& left_first,
                    std::vector<Pair>& log) {
  if (hi - lo <= 1) return;
  const std::size_t mid = lo + (hi - lo) / 2;
  reference_sort(v, lo, mid, left_first, log);
  reference_sort(v, mid, hi, left_first, log);
  std::vector<int> left(v.begin() + lo, v.begin() + mid);
  std::vector<int> right(v.begin() + mid, v.begin() + hi);
  std::size_t i = 0, j = 0, k = lo;
  while (i < left.size() && j < right.size()) {
    log.emplace_back(left[i], right[j]);
    if (left_first(left[i], right[j]))
      v[k++] = left[i++];
    else
      v[k++] = right[j++];
  }
  while (i < left.size()) v[k++] = left[i++];
  while (j < right.size()) v[k++] = right[j++];
}

std::vector<Pair> drive(MergeMachine<int>& m,
                        const std::function<bool(int, int)>& left_first) {
  std::vector<Pair> log;
  while (!m.done()) {
    const auto [a, b] = m.pending();
    log.emplace_back(a, b);
    m.resolve(left_first(a, b));
  }
  return log;
}

TEST(MergePlan, Shape) {
  EXPECT_TRUE(top_down_merge_plan(0).empty());
  EXPECT_TRUE(top_down_merge_plan(1).empty());
  for (std::size_t n = 2; n <= 100; ++n) {
    const auto plan = top_down_merge_plan(n);
    ASSERT_EQ(plan.size(), n - 1);
    EXPECT_EQ(plan.back().lo, 0u);
    EXPECT_EQ(plan.back().hi, n);
    EXPECT_EQ(plan.back().mid, n / 2);
  }
  const auto p5 = top_down_merge_plan(5);
  // [0,2) then [3,5), [2,5), [0,5)
  ASSERT_EQ(p5.size(), 4u);
  EXPECT_EQ(p5[0].lo, 0u);
  EXPECT_EQ(p5[0].hi, 2u);
  EXPECT_EQ(p5[1].lo, 3u);
  EXPECT_EQ(p5[1].hi, 5u);
  EXPECT_EQ(p5[2].lo, 2u);
  EXPECT_EQ(p5[2].hi, 5u);
}

TEST(MergeMachine, TrivialSizes) {
  MergeMachine<int> empty(std::vector<int>{});
  EXPECT_TRUE(empty.done());
  MergeMachine<int> one(std::vector<int>{7});
  EXPECT_TRUE(one.done());
  EXPECT_EQ(one.comparisons(), 0);
  EXPECT_THROW(one.pending(), StateError);
  EXPECT_THROW(one.resolve(true), StateError);

  MergeMachine<int> two(std::vector<int>{1, 2});
  ASSERT_FALSE(two.done());
  EXPECT_EQ(two.pending().first, 1);
  EXPECT_EQ(two.pending().second, 2);
  EXPECT_TRUE(two.resolve(false));
  EXPECT_TRUE(two.done());
  EXPECT_EQ(two.sequence(), (std::vector<int>{2, 1}));
}

TEST(MergeMachine, FourItemsTakeFourOrFive) {
  std::vector<int> v{0, 1, 2, 3};
  std::set<std::int64_t> counts;
  do {
    MergeMachine<int> m(v);
    drive(m, [](int a, int b) { return a < b; });
    counts.insert(m.comparisons());
    EXPECT_TRUE(std::is_sorted(m.sequence().begin(), m.sequence().end()));
  } while (std::next_permutation(v.begin(), v.end()));
  EXPECT_EQ(counts, (std::set<std::int64_t>{4, 5}));
}

TEST(MergeMachine, ScheduleMatchesReference) {
  Xoshiro256 rng(31337);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(64);
    std::vector<int> v(n);
    std::iota(v.begin(), v.end(), 0);
    Shuffle(v, rng);
    // A fixed but arbitrary outcome function (not necessarily a total order).
    const std::uint64_t salt = rng();
    auto left_first = [salt](int a, int b) {
      std::uint64_t h = salt ^ (static_cast<std::uint64_t>(a) * 0x9E3779B97F4A7C15ULL) ^
                        (static_cast<std::uint64_t>(b) * 0xC2B2AE3D27D4EB4FULL);
      h ^= h >> 31;
      return (h & 1) == 0;
    };
    auto ref = v;
    std::vector<Pair> ref_log;
    reference_sort(ref, 0, ref.size(), left_first, ref_log);
    MergeMachine<int> m(v);
    const auto log = drive(m, left_first);
    ASSERT_EQ(log, ref_log) << "trial " << trial << " n=" << n;
    ASSERT_EQ(m.sequence(), ref);
    ASSERT_EQ(m.comparisons(), static_cast<std::int64_t>(ref_log.size()));
  }
}

TEST(MergeMachine, WorstCaseBound) {
  EXPECT_EQ(merge_sort_worst_case(1), 0);
  EXPECT_EQ(merge_sort_worst_case(2), 1);
  EXPECT_EQ(merge_sort_worst_case(4), 5);
  EXPECT_EQ(merge_sort_worst_case(30), 119);
  EXPECT_EQ(merge_sort_worst_case(100), 573);
  Xoshiro256 rng(8);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng.below(200);
    std::vector<int> v(n);
    std::iota(v.begin(), v.end(), 0);
    Shuffle(v, rng);
    MergeMachine<int> m(v);
    drive(m, [](int a, int b) { return a < b; });
    ASSERT_LE(m.comparisons(), merge_sort_worst_case(static_cast<std::int64_t>(n)));
    ASSERT_TRUE(std::is_sorted(m.sequence().begin(), m.sequence().end()));
  }
}

TEST(MergeMachine, MergeCompletionSignal) {
  std::vector<int> v{3, 2, 1, 0};
  MergeMachine<int> m(v);
  std::size_t completed = 0;
  while (!m.done()) {
    const auto [a, b] = m.pending();
    if (m.resolve(a < b)) ++completed;
    EXPECT_EQ(m.merges_completed(), completed);
  }
  EXPECT_EQ(completed, 3u);
}

}  // namespace
}  // namespace hilsort
