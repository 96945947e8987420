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

// Zero-shot pre-ordering: turns per-level binary similarity scores into a
// group index, a coarse bucket, an item confidence and an initial Elo rating.
//
// Each item i walks a binary prompt hierarchy of depth d_i. At level l the
// two prompt scores give a decision c_l (argmax) and a softmax confidence.
// The decisions encode a group index little-endian:
//
//   g_i = sum_{l=1..d_i} c_l * 2^(l-1)
//
// which is folded into one of k buckets with b_i = floor(g_i * k / 2^d_i).
// The initial rating is the bucket's base rating plus confidence-scaled
// uniform noise: r_i = r_base(b_i) + eta_i * (1.5 - conf_i).

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hilsort/error.hpp"
#include "hilsort/rng.hpp"

namespace hilsort {

inline constexpr int kMaxDepth = 16;
inline constexpr double kDefaultTemperature = 0.1;

struct ItemRecord {
  std::string id;
  std::string display_ref;
  std::optional<double> ground_truth;
};

// Score pair (s_0, s_1) for one binary level.
using LevelScores = std::array<double, 2>;

// Per-item similarity rows; the number of rows is the item's depth.
struct SimilarityTable {
  double tau = kDefaultTemperature;
  std::map<std::string, std::vector<LevelScores>> items;
};

struct LevelDecision {
  int decision = 0;
  double confidence = 0.5;
};

struct EloInitConfig {
  int bucket_count = 5;
  double rating_base_min = 1200.0;
  double rating_base_max = 1800.0;
  double noise_halfwidth = 75.0;
  std::uint64_t rng_seed = 0;

  void Validate() const {
    if (bucket_count < 1) throw InputError("bucket_count must be >= 1");
    if (!(noise_halfwidth >= 0.0) || !std::isfinite(noise_halfwidth))
      throw InputError("noise_halfwidth must be finite and >= 0");
    if (!std::isfinite(rating_base_min) || !std::isfinite(rating_base_max))
      throw InputError("rating base range must be finite");
    if (bucket_count > 1 && !(rating_base_min < rating_base_max))
      throw InputError("rating_base_min must be < rating_base_max when k > 1");
  }
};

struct PreorderResult {
  std::string item_id;
  std::uint32_t group_index = 0;
  int depth = 0;
  int bucket = 0;
  double confidence = 0.5;
  double initial_rating = 0.0;
};

// Argmax decision (ties go to 0) and the softmax probability of the winner.
inline LevelDecision classify_level(const LevelScores& scores, double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau))
    throw InputError("temperature must be finite and > 0");
  if (!std::isfinite(scores[0]) || !std::isfinite(scores[1]))
    throw InputError("similarity scores must be finite");
  const int decision = scores[1] > scores[0] ? 1 : 0;
  const double lead = scores[decision];
  const double trail = scores[1 - decision];
  // exp(lead/tau) / (exp(lead/tau) + exp(trail/tau)) with the max factored out.
  const double confidence = 1.0 / (1.0 + std::exp((trail - lead) / tau));
  return {decision, confidence};
}

inline std::uint32_t group_index(std::span<const int> decisions) {
  if (decisions.empty()) throw InputError("decision list is empty");
  if (decisions.size() > static_cast<std::size_t>(kMaxDepth))
    throw InputError("hierarchy depth exceeds " + std::to_string(kMaxDepth));
  std::uint32_t g = 0;
  for (std::size_t level = 0; level < decisions.size(); ++level) {
    const int c = decisions[level];
    if (c != 0 && c != 1) throw InputError("decisions must be 0 or 1");
    g |= static_cast<std::uint32_t>(c) << level;
  }
  return g;
}

inline int bucket_of(std::uint32_t g, int depth, int k) {
  if (depth < 1 || depth > kMaxDepth)
    throw InputError("depth must be in [1, " + std::to_string(kMaxDepth) + "]");
  if (k < 1) throw InputError("bucket count must be >= 1");
  const std::uint64_t groups = std::uint64_t{1} << depth;
  if (g >= groups)
    throw InputError("group index " + std::to_string(g) +
                     " out of range for depth " + std::to_string(depth));
  return static_cast<int>(static_cast<std::uint64_t>(g) *
                          static_cast<std::uint64_t>(k) / groups);
}

// Mean of the per-level confidences.
inline double item_confidence(std::span<const double> level_confidences) {
  if (level_confidences.empty())
    throw InputError("cannot aggregate confidence over zero levels");
  double sum = 0.0;
  for (double c : level_confidences) sum += c;
  return sum / static_cast<double>(level_confidences.size());
}

inline double rating_base(int bucket, const EloInitConfig& cfg) {
  if (bucket < 0 || bucket >= cfg.bucket_count)
    throw InputError("bucket " + std::to_string(bucket) + " out of range");
  if (cfg.bucket_count == 1)
    return 0.5 * (cfg.rating_base_min + cfg.rating_base_max);
  return cfg.rating_base_min + (cfg.rating_base_max - cfg.rating_base_min) *
                                   static_cast<double>(bucket) /
                                   static_cast<double>(cfg.bucket_count - 1);
}

// Rating with an explicit noise draw `eta` in [-noise_halfwidth, +noise_halfwidth].
inline double init_rating(int bucket, double conf, const EloInitConfig& cfg,
                          double eta) {
  if (!(conf > 0.0 && conf <= 1.0))
    throw InputError("confidence must be in (0, 1]");
  return rating_base(bucket, cfg) + eta * (1.5 - conf);
}

inline double init_rating(int bucket, double conf, const EloInitConfig& cfg,
                          Xoshiro256& rng) {
  const double eta = rng.uniform(-cfg.noise_halfwidth, cfg.noise_halfwidth);
  return init_rating(bucket, conf, cfg, eta);
}

// Results come back in the order of `items`; noise is drawn in ascending id
// order so the output does not depend on input order.
inline std::vector<PreorderResult> run_preorder(
    const std::vector<ItemRecord>& items, const SimilarityTable& sims,
    const EloInitConfig& cfg) {
  cfg.Validate();
  std::vector<std::size_t> by_id(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) by_id[i] = i;
  std::sort(by_id.begin(), by_id.end(), [&](std::size_t a, std::size_t b) {
    return items[a].id < items[b].id;
  });
  for (std::size_t i = 1; i < by_id.size(); ++i) {
    if (items[by_id[i]].id == items[by_id[i - 1]].id)
      throw InputError("duplicate item id", {items[by_id[i]].id});
  }

  std::vector<std::string> missing;
  for (const auto& item : items) {
    if (!sims.items.contains(item.id)) missing.push_back(item.id);
  }
  if (!missing.empty())
    throw InputError("no similarity record for item(s)", missing);

  std::vector<PreorderResult> results(items.size());
  Xoshiro256 rng(cfg.rng_seed);
  for (std::size_t idx : by_id) {
    const auto& item = items[idx];
    const auto& levels = sims.items.at(item.id);
    if (levels.empty() || levels.size() > static_cast<std::size_t>(kMaxDepth))
      throw InputError("item has " + std::to_string(levels.size()) +
                           " levels; expected 1.." + std::to_string(kMaxDepth),
                       {item.id});
    std::vector<int> decisions;
    std::vector<double> confidences;
    decisions.reserve(levels.size());
    confidences.reserve(levels.size());
    for (const auto& scores : levels) {
      const auto level = classify_level(scores, sims.tau);
      decisions.push_back(level.decision);
      confidences.push_back(level.confidence);
    }
    PreorderResult& out = results[idx];
    out.item_id = item.id;
    out.depth = static_cast<int>(levels.size());
    out.group_index = group_index(decisions);
    out.bucket = bucket_of(out.group_index, out.depth, cfg.bucket_count);
    out.confidence = item_confidence(confidences);
    out.initial_rating = init_rating(out.bucket, out.confidence, cfg, rng);
  }
  return results;
}

}  // namespace hilsort
