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

#include "hilsort/rating.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "hilsort/rng.hpp"

namespace hilsort {
namespace {

// tests/oracles/formula_oracle.py
constexpr double kP1800v1200 = 0.969346569968284491;
constexpr double kP1200v1800 = 0.030653430031715509;
constexpr double kP1600v1400 = 0.759746926647957852;
constexpr double kInfoGain09 = 0.368064207168497070;
constexpr double kUncSameConf1 = 0.468995593589281221;
constexpr double kPriorityCross08 = 0.530012458322635781;
constexpr double kUncCross08 = 0.235353654768564959;
constexpr double kEloDelta1800Wins = 0.980909761014896283;

TEST(ExpectedScore, Values) {
  EXPECT_DOUBLE_EQ(expected_score(1500, 1500), 0.5);
  EXPECT_NEAR(expected_score(1800, 1200), kP1800v1200, 1e-15);
  EXPECT_NEAR(expected_score(1200, 1800), kP1200v1800, 1e-15);
  EXPECT_NEAR(expected_score(1600, 1400), kP1600v1400, 1e-15);
  EXPECT_THROW(expected_score(NAN, 1500), InputError);
}

TEST(ExpectedScore, Antisymmetry) {
  Xoshiro256 rng(2024);
  for (int i = 0; i < 1000000; ++i) {
    const double a = rng.uniform(0, 3000), b = rng.uniform(0, 3000);
    const double sum = expected_score(a, b) + expected_score(b, a);
    ASSERT_NEAR(sum, 1.0, 1e-12) << a << " " << b;
  }
}

TEST(InfoGain, Values) {
  EXPECT_DOUBLE_EQ(info_gain(0.5), 0.0);
  EXPECT_NEAR(info_gain(0.9), kInfoGain09, 1e-15);
  EXPECT_NEAR(info_gain(0.1), kInfoGain09, 1e-15);
  EXPECT_THROW(info_gain(0.0), InputError);
  EXPECT_THROW(info_gain(1.0), InputError);
  EXPECT_THROW(info_gain(NAN), InputError);
}

TEST(InfoGain, SymmetricBoundedIncreasing) {
  double prev = 0.0;
  for (int i = 1; i < 100000; ++i) {
    const double p = 0.5 + 0.5 * i / 100000.0;
    const double g = info_gain(p);
    EXPECT_NEAR(g, info_gain(1.0 - p), 1e-12);
    EXPECT_GE(g, 0.0);
    EXPECT_LT(g, kLn2);
    EXPECT_GT(g, prev);
    prev = g;
  }
}

struct Fixture {
  EloState elo;
  std::vector<PreorderResult> pre;
};

Fixture two_items(double ri, double rj, int bi, int bj, double ci, double cj) {
  Fixture f;
  f.elo.Add("i", ri);
  f.elo.Add("j", rj);
  f.pre.push_back({"i", 0, 3, bi, ci, ri});
  f.pre.push_back({"j", 0, 3, bj, cj, rj});
  return f;
}

// Rating gap that gives p = 0.9: 400 log10(9).
const double kGap09 = 400.0 * std::log10(9.0);

TEST(AssessPair, EqualRatingsAreMaximallyUncertain) {
  auto f = two_items(1500, 1500, 2, 2, 1.0, 1.0);
  auto a = assess_pair(0, 1, f.elo, f.pre);
  EXPECT_DOUBLE_EQ(a.p_left, 0.5);
  EXPECT_DOUBLE_EQ(a.priority, 0.0);
  EXPECT_DOUBLE_EQ(a.uncertainty, 1.0);
  EXPECT_FALSE(a.cross_bucket);
}

TEST(AssessPair, SameBucketConfident) {
  auto f = two_items(1500 + kGap09, 1500, 2, 2, 1.0, 1.0);
  auto a = assess_pair(0, 1, f.elo, f.pre);
  EXPECT_NEAR(a.p_left, 0.9, 1e-12);
  EXPECT_NEAR(a.priority, kInfoGain09, 1e-12);
  EXPECT_NEAR(a.uncertainty, kUncSameConf1, 1e-12);
}

TEST(AssessPair, CrossBucketLowConfidence) {
  auto f = two_items(1500 + kGap09, 1500, 3, 2, 0.8, 0.8);
  auto a = assess_pair(0, 1, f.elo, f.pre);
  EXPECT_TRUE(a.cross_bucket);
  EXPECT_NEAR(a.avg_conf, 0.8, 1e-15);
  EXPECT_NEAR(a.priority, kPriorityCross08, 1e-12);
  EXPECT_NEAR(a.uncertainty, kUncCross08, 1e-12);
}

TEST(AssessPair, OutOfRange) {
  auto f = two_items(1500, 1500, 2, 2, 1.0, 1.0);
  EXPECT_THROW(assess_pair(0, 2, f.elo, f.pre), InputError);
}

TEST(AssessPair, RouteIsSymmetric) {
  Xoshiro256 rng(5);
  for (int t = 0; t < 100000; ++t) {
    auto f = two_items(rng.uniform(1000, 2000), rng.uniform(1000, 2000),
                       static_cast<int>(rng.below(5)), static_cast<int>(rng.below(5)),
                       rng.uniform(0.5, 1.0), rng.uniform(0.5, 1.0));
    const auto ab = assess_pair(0, 1, f.elo, f.pre);
    const auto ba = assess_pair(1, 0, f.elo, f.pre);
    ASSERT_EQ(ab.uncertainty, ba.uncertainty);
    const double theta = rng.uniform(0, 1.1);
    ASSERT_EQ(route_to_human(ab.uncertainty, theta),
              route_to_human(ba.uncertainty, theta));
  }
}

TEST(Uncertainty, Clamped) {
  EXPECT_DOUBLE_EQ(uncertainty_from_priority(0.0), 1.0);
  EXPECT_DOUBLE_EQ(uncertainty_from_priority(2.4 * kLn2), 0.0);
  EXPECT_DOUBLE_EQ(uncertainty_from_priority(kLn2), 0.0);
  EXPECT_DOUBLE_EQ(uncertainty_from_priority(-1.0), 1.0);
  Xoshiro256 rng(1);
  for (int i = 0; i < 100000; ++i) {
    const double u = uncertainty_from_priority(rng.uniform(-1, 2.4 * kLn2));
    ASSERT_GE(u, 0.0);
    ASSERT_LE(u, 1.0);
  }
}

TEST(Routing, TieGoesToHuman) {
  EXPECT_TRUE(route_to_human(0.3, 0.3));
  EXPECT_TRUE(route_to_human(0.0, 0.0));
  EXPECT_FALSE(route_to_human(1.0, 1.0000001));
}

TEST(EloUpdate, Examples) {
  EloState elo;
  elo.Add("i", 1500);
  elo.Add("j", 1500);
  elo_update(elo, "i", "j", Outcome::kLeftFirst);
  EXPECT_DOUBLE_EQ(elo.rating("i"), 1516.0);
  EXPECT_DOUBLE_EQ(elo.rating("j"), 1484.0);

  EloState tie;
  tie.Add("i", 1500);
  tie.Add("j", 1500);
  elo_update(tie, 0, 1, Outcome::kEqual);
  EXPECT_DOUBLE_EQ(tie.rating(0), 1500.0);
  EXPECT_DOUBLE_EQ(tie.rating(1), 1500.0);

  EloState gap;
  gap.Add("i", 1800);
  gap.Add("j", 1200);
  elo_update(gap, 0, 1, Outcome::kLeftFirst);
  EXPECT_NEAR(gap.rating(0), 1800.0 + kEloDelta1800Wins, 1e-9);
  EXPECT_NEAR(gap.rating(1), 1200.0 - kEloDelta1800Wins, 1e-9);
  EXPECT_NEAR(gap.rating(0), 1800.98, 0.01);
}

TEST(EloUpdate, EqualMovesTowardHalf) {
  EloState elo;
  elo.Add("i", 1600);
  elo.Add("j", 1400);
  elo_update(elo, 0, 1, Outcome::kEqual);
  EXPECT_NEAR(elo.rating(0), 1600 + 32 * (0.5 - kP1600v1400), 1e-9);
  EXPECT_NEAR(elo.rating(1), 1400 - 32 * (0.5 - kP1600v1400), 1e-9);
}

TEST(EloUpdate, ZeroSum) {
  Xoshiro256 rng(77);
  EloState elo;
  for (int i = 0; i < 64; ++i) elo.Add("x" + std::to_string(i), rng.uniform(1200, 1800));
  for (int step = 0; step < 1000000; ++step) {
    const std::size_t i = rng.below(64);
    std::size_t j = rng.below(63);
    if (j >= i) ++j;
    const double before = elo.rating(i) + elo.rating(j);
    elo_update(elo, i, j, static_cast<Outcome>(rng.below(3)));
    ASSERT_LT(std::abs(elo.rating(i) + elo.rating(j) - before), 1e-9);
  }
}

TEST(EloUpdate, UnknownIds) {
  EloState elo;
  elo.Add("i", 1500);
  EXPECT_THROW(elo_update(elo, "i", "z", Outcome::kLeftFirst), InputError);
  EXPECT_THROW(elo_update(elo, 0, 3, Outcome::kLeftFirst), InputError);
  EXPECT_THROW(elo.Add("i", 1), InputError);
  EXPECT_THROW(elo.Add("k", INFINITY), InputError);
}

TEST(Outcome, RoundTrip) {
  for (auto o : {Outcome::kLeftFirst, Outcome::kRightFirst, Outcome::kEqual})
    EXPECT_EQ(parse_outcome(to_string(o)), o);
  EXPECT_THROW(parse_outcome("left"), InputError);
}

ThresholdState ts_with(std::int64_t done, std::int64_t total, double acc) {
  ThresholdState ts;
  ts.comparisons_done = done;
  ts.comparisons_total_estimate = total;
  ts.accuracy = acc;
  return ts;
}

TEST(Threshold, Examples) {
  EXPECT_NEAR(current_threshold(ts_with(0, 100, 0.0)), 0.195, 1e-12);
  EXPECT_NEAR(current_threshold(ts_with(100, 100, 0.0)), 0.15, 1e-12);
  EXPECT_NEAR(current_threshold(ts_with(50, 100, 1.0)), 0.15525, 1e-12);
  EXPECT_NEAR(current_threshold(ts_with(0, 0, 0.0)), 0.15, 1e-12);
  auto inv = ts_with(50, 100, 1.0);
  inv.exponent_mode = ExponentMode::kInverted;
  EXPECT_NEAR(current_threshold(inv), 0.15 * 1.15 / 0.9, 1e-12);
}

TEST(Threshold, Monotone) {
  for (double acc = 0.0; acc <= 1.0; acc += 0.05) {
    double prev = 1e9;
    for (int done = 0; done <= 200; ++done) {
      const double t = current_threshold(ts_with(done, 200, acc));
      EXPECT_LE(t, prev);
      EXPECT_GT(t, 0.0);
      prev = t;
    }
  }
  double prev = 1e9;
  for (double acc = 0.0; acc <= 1.0; acc += 0.01) {
    const double t = current_threshold(ts_with(30, 100, acc));
    EXPECT_LE(t, prev);
    prev = t;
  }
}

TEST(Threshold, CycleAccuracy) {
  ThresholdState ts;
  ts = update_threshold_cycle(ts, 10, 9);
  EXPECT_DOUBLE_EQ(ts.accuracy, 0.9);
  EXPECT_EQ(ts.cycle, 1);
  ts = update_threshold_cycle(ts, 0, 0);
  EXPECT_DOUBLE_EQ(ts.accuracy, 0.9);
  EXPECT_EQ(ts.cycle, 2);
  ts = update_threshold_cycle(ts, 10, 7);
  EXPECT_DOUBLE_EQ(ts.accuracy, 0.8);
  EXPECT_EQ(ts.cycle, 3);
  EXPECT_THROW(update_threshold_cycle(ts, 3, 4), InputError);
}

TEST(Threshold, NoHistoryKeepsZeroAccuracy) {
  ThresholdState ts;
  ts = update_threshold_cycle(ts, 0, 0);
  EXPECT_DOUBLE_EQ(ts.accuracy, 0.0);
  EXPECT_EQ(ts.cycle, 1);
}

TEST(Threshold, Budget) {
  EXPECT_EQ(comparison_budget(1), 0);
  EXPECT_EQ(comparison_budget(2), 2);
  EXPECT_EQ(comparison_budget(30), 150);
  EXPECT_EQ(comparison_budget(100), 700);
}

TEST(ExponentMode, Parse) {
  EXPECT_EQ(parse_exponent_mode("as_written"), ExponentMode::kAsWritten);
  EXPECT_EQ(parse_exponent_mode("inverted"), ExponentMode::kInverted);
  EXPECT_THROW(parse_exponent_mode("flip"), InputError);
}

}  // namespace
}  // namespace hilsort
