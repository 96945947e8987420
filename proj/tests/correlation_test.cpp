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

#include "hilsort/correlation.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "hilsort/rng.hpp"

namespace hilsort {
namespace {

// O(n^2) tau-b straight from the definition.
double brute_tau_b(const std::vector<double>& a, const std::vector<double>& b) {
  double nc = 0, nd = 0, ta = 0, tb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const double da = a[i] - a[j], db = b[i] - b[j];
      if (da == 0 && db == 0) continue;
      if (da == 0) {
        ++ta;
      } else if (db == 0) {
        ++tb;
      } else if ((da > 0) == (db > 0)) {
        ++nc;
      } else {
        ++nd;
      }
    }
  }
  return (nc - nd) / std::sqrt((nc + nd + ta) * (nc + nd + tb));
}

TEST(Correlation, Identical) {
  std::vector<double> a{1, 2, 3, 4, 5};
  EXPECT_DOUBLE_EQ(spearman(a, a), 1.0);
  EXPECT_DOUBLE_EQ(kendall_tau_b(a, a), 1.0);
  EXPECT_DOUBLE_EQ(pearson(a, a), 1.0);
}

TEST(Correlation, Reversed) {
  std::vector<double> a{1, 2, 3, 4, 5}, b{5, 4, 3, 2, 1};
  EXPECT_DOUBLE_EQ(spearman(a, b), -1.0);
  EXPECT_DOUBLE_EQ(kendall_tau_b(a, b), -1.0);
}

TEST(Correlation, SmallExample) {
  std::vector<double> a{1, 2, 3, 4}, b{1, 3, 2, 4};
  EXPECT_NEAR(spearman(a, b), 0.8, 1e-12);
  EXPECT_NEAR(kendall_tau_b(a, b), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(brute_tau_b(a, b), 2.0 / 3.0, 1e-12);
}

TEST(Correlation, AverageRanks) {
  std::vector<double> v{10, 20, 10, 30};
  EXPECT_EQ(average_ranks(v), (std::vector<double>{1.5, 3, 1.5, 4}));
}

TEST(Correlation, TauBMatchesBruteForceWithTies) {
  Xoshiro256 rng(17);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 2 + rng.below(60);
    std::vector<double> a(n), b(n);
    const std::uint64_t levels = 1 + rng.below(8);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = static_cast<double>(rng.below(levels));
      b[i] = static_cast<double>(rng.below(levels));
    }
    const double expected = brute_tau_b(a, b);
    if (!std::isfinite(expected)) {
      EXPECT_THROW(kendall_tau_b(a, b), UndefinedCorrelation);
      continue;
    }
    ASSERT_NEAR(kendall_tau_b(a, b), expected, 1e-12) << "trial " << trial;
  }
}

TEST(Correlation, ConstantInputIsUndefined) {
  std::vector<double> a{1, 2, 3}, c{2, 2, 2};
  EXPECT_THROW(spearman(a, c), UndefinedCorrelation);
  EXPECT_THROW(kendall_tau_b(c, a), UndefinedCorrelation);
  EXPECT_THROW(pearson(c, a), UndefinedCorrelation);
}

TEST(Correlation, ShapeErrors) {
  std::vector<double> a{1, 2, 3}, b{1, 2};
  EXPECT_THROW(spearman(a, b), InputError);
  std::vector<double> one{1};
  EXPECT_THROW(pearson(one, one), InputError);
}

}  // namespace
}  // namespace hilsort
