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
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "hilsort/error.hpp"

namespace hilsort {

class UndefinedCorrelation : public InputError {
 public:
  using InputError::InputError;
};

namespace detail {

inline void check_pair(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw InputError("correlation inputs differ in length");
  if (a.size() < 2) throw InputError("correlation needs at least two samples");
}

}  // namespace detail

// 1-based ranks; tied values share their mean rank.
inline std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    const double mean_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = mean_rank;
    i = j;
  }
  return ranks;
}

inline double pearson(std::span<const double> a, std::span<const double> b) {
  detail::check_pair(a, b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0)
    throw UndefinedCorrelation("correlation is undefined for constant input");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

inline double spearman(std::span<const double> a, std::span<const double> b) {
  detail::check_pair(a, b);
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  return pearson(ra, rb);
}

// Kendall tau-b via Knight's O(n log n) algorithm: sort by (a, b), count
// discordant pairs as the inversions of a merge sort on b.
inline double kendall_tau_b(std::span<const double> a,
                            std::span<const double> b) {
  detail::check_pair(a, b);
  const std::size_t n = a.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
    return a[x] != a[y] ? a[x] < a[y] : b[x] < b[y];
  });

  auto tie_pairs = [](std::uint64_t run) { return run * (run - 1) / 2; };
  std::uint64_t ties_a = 0, ties_ab = 0;
  {
    std::uint64_t run_a = 1, run_ab = 1;
    for (std::size_t i = 1; i < n; ++i) {
      const bool same_a = a[idx[i]] == a[idx[i - 1]];
      const bool same_ab = same_a && b[idx[i]] == b[idx[i - 1]];
      if (same_a) {
        ++run_a;
      } else {
        ties_a += tie_pairs(run_a);
        run_a = 1;
      }
      if (same_ab) {
        ++run_ab;
      } else {
        ties_ab += tie_pairs(run_ab);
        run_ab = 1;
      }
    }
    ties_a += tie_pairs(run_a);
    ties_ab += tie_pairs(run_ab);
  }

  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = b[idx[i]];
  std::vector<double> scratch(n);
  std::uint64_t swaps = 0;
  for (std::size_t width = 1; width < n; width *= 2) {
    for (std::size_t lo = 0; lo < n; lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, n);
      const std::size_t hi = std::min(lo + 2 * width, n);
      std::size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (ys[j] < ys[i]) {
          swaps += mid - i;
          scratch[k++] = ys[j++];
        } else {
          scratch[k++] = ys[i++];
        }
      }
      while (i < mid) scratch[k++] = ys[i++];
      while (j < hi) scratch[k++] = ys[j++];
    }
    std::swap(ys, scratch);
  }

  std::uint64_t ties_b = 0;
  {
    std::uint64_t run = 1;
    for (std::size_t i = 1; i < n; ++i) {
      if (ys[i] == ys[i - 1]) {
        ++run;
      } else {
        ties_b += tie_pairs(run);
        run = 1;
      }
    }
    ties_b += tie_pairs(run);
  }

  const double total = static_cast<double>(tie_pairs(n));
  const double denom_a = total - static_cast<double>(ties_a);
  const double denom_b = total - static_cast<double>(ties_b);
  if (denom_a == 0.0 || denom_b == 0.0)
    throw UndefinedCorrelation("tau-b is undefined for constant input");
  const double concordant_minus_discordant =
      total - static_cast<double>(ties_a) - static_cast<double>(ties_b) +
      static_cast<double>(ties_ab) - 2.0 * static_cast<double>(swaps);
  return std::clamp(concordant_minus_discordant / std::sqrt(denom_a * denom_b),
                    -1.0, 1.0);
}

}  // namespace hilsort
