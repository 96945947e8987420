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

// Elo math, KL-based comparison priority, and the adaptive routing threshold.
//
// For a pair (i, j) with live ratings the predicted win probability is
//
//   p_ij = 1 / (1 + 10^((r_j - r_i) / 400))
//
// and its information gain is KL([p, 1-p] || [0.5, 0.5]) in nats. Priority
// scales that by gamma (1.2 across buckets, 1.0 within) and by
// phi = 2 - mean(conf_i, conf_j). Uncertainty is 1 - priority / ln 2 clamped
// to [0, 1]; a pair goes to a human iff uncertainty >= theta_t, where
//
//   theta_t = theta0 * (1 + alpha * remaining / total) * beta^accuracy_t.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hilsort/error.hpp"
#include "hilsort/preorder.hpp"

namespace hilsort {

inline constexpr double kLn2 = std::numbers::ln2;

enum class Outcome { kLeftFirst, kRightFirst, kEqual };

inline std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::kLeftFirst:
      return "left_first";
    case Outcome::kRightFirst:
      return "right_first";
    case Outcome::kEqual:
      return "equal";
  }
  return "equal";
}

inline Outcome parse_outcome(std::string_view s) {
  if (s == "left_first") return Outcome::kLeftFirst;
  if (s == "right_first") return Outcome::kRightFirst;
  if (s == "equal") return Outcome::kEqual;
  throw InputError("outcome must be one of left_first, right_first, equal",
                   {std::string(s)});
}

// Live ratings, addressed by dense index; ids are kept for lookup.
class EloState {
 public:
  explicit EloState(double k_factor = 32.0) : k_factor_(k_factor) {}

  std::size_t Add(const std::string& id, double rating) {
    if (!std::isfinite(rating)) throw InputError("rating must be finite", {id});
    if (index_.contains(id)) throw InputError("duplicate item id", {id});
    index_.emplace(id, ids_.size());
    ids_.push_back(id);
    ratings_.push_back(rating);
    return ids_.size() - 1;
  }

  std::size_t index_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw InputError("unknown item id", {id});
    return it->second;
  }

  double rating(std::size_t idx) const { return ratings_.at(idx); }
  double rating(const std::string& id) const { return ratings_[index_of(id)]; }
  double& mutable_rating(std::size_t idx) { return ratings_.at(idx); }

  const std::string& id(std::size_t idx) const { return ids_.at(idx); }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<double>& ratings() const { return ratings_; }
  std::size_t size() const { return ids_.size(); }
  double k_factor() const { return k_factor_; }

 private:
  double k_factor_;
  std::vector<std::string> ids_;
  std::vector<double> ratings_;
  std::unordered_map<std::string, std::size_t> index_;
};

inline double expected_score(double r_i, double r_j) {
  if (!std::isfinite(r_i) || !std::isfinite(r_j))
    throw InputError("ratings must be finite");
  return 1.0 / (1.0 + std::pow(10.0, (r_j - r_i) / 400.0));
}

// KL divergence of [p, 1-p] from the uniform distribution, in nats.
inline double info_gain(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InputError("probability must be in (0, 1)");
  const double q = 1.0 - p;
  return p * std::log(2.0 * p) + q * std::log(2.0 * q);
}

struct PriorityParams {
  double cross_bucket_gamma = 1.2;
  double confidence_offset = 2.0;
};

struct PairAssessment {
  std::size_t left = 0;
  std::size_t right = 0;
  double p_left = 0.5;
  double info_gain = 0.0;
  double priority = 0.0;
  double uncertainty = 1.0;
  bool cross_bucket = false;
  double avg_conf = 1.0;
};

inline double uncertainty_from_priority(double priority) {
  return std::clamp(1.0 - priority / kLn2, 0.0, 1.0);
}

// `pre` is indexed like `elo`. Information gain is evaluated from the
// higher-rated side so that (i, j) and (j, i) give bit-identical priority.
inline PairAssessment assess_pair(std::size_t i, std::size_t j,
                                  const EloState& elo,
                                  const std::vector<PreorderResult>& pre,
                                  const PriorityParams& params = {}) {
  if (i >= elo.size() || j >= elo.size() || i >= pre.size() ||
      j >= pre.size())
    throw InputError("pair references an unknown item");
  PairAssessment a;
  a.left = i;
  a.right = j;
  const double ri = elo.rating(i);
  const double rj = elo.rating(j);
  a.p_left = expected_score(ri, rj);
  const double p_favourite = ri >= rj ? a.p_left : expected_score(rj, ri);
  a.info_gain = info_gain(p_favourite);
  a.cross_bucket = pre[i].bucket != pre[j].bucket;
  a.avg_conf = 0.5 * (pre[i].confidence + pre[j].confidence);
  const double gamma = a.cross_bucket ? params.cross_bucket_gamma : 1.0;
  const double phi = params.confidence_offset - a.avg_conf;
  a.priority = a.info_gain * gamma * phi;
  a.uncertainty = uncertainty_from_priority(a.priority);
  return a;
}

inline bool route_to_human(double uncertainty, double theta) {
  return uncertainty >= theta;
}

// Applies one judgment: s_i in {1, 0, 0.5}; r_i += K (s_i - p_ij) and r_j
// moves by the same amount in the opposite direction.
inline void elo_update(EloState& elo, std::size_t i, std::size_t j,
                       Outcome outcome) {
  if (i >= elo.size() || j >= elo.size())
    throw InputError("elo update references an unknown item");
  const double p = expected_score(elo.rating(i), elo.rating(j));
  const double s = outcome == Outcome::kLeftFirst    ? 1.0
                   : outcome == Outcome::kRightFirst ? 0.0
                                                     : 0.5;
  const double delta = elo.k_factor() * (s - p);
  elo.mutable_rating(i) += delta;
  elo.mutable_rating(j) -= delta;
}

inline void elo_update(EloState& elo, const std::string& i,
                       const std::string& j, Outcome outcome) {
  elo_update(elo, elo.index_of(i), elo.index_of(j), outcome);
}

enum class ExponentMode { kAsWritten, kInverted };

inline std::string_view to_string(ExponentMode m) {
  return m == ExponentMode::kAsWritten ? "as_written" : "inverted";
}

inline ExponentMode parse_exponent_mode(std::string_view s) {
  if (s == "as_written") return ExponentMode::kAsWritten;
  if (s == "inverted") return ExponentMode::kInverted;
  throw InputError("exponent_mode must be as_written or inverted",
                   {std::string(s)});
}

// Threshold controller state. theta only changes at cycle boundaries:
// comparisons_done and accuracy are snapshots taken when the cycle turned.
struct ThresholdState {
  double theta0 = 0.15;
  double alpha = 0.3;
  double beta = 0.9;
  ExponentMode exponent_mode = ExponentMode::kAsWritten;
  int batch_size = 10;
  int merge_batch = 10;

  std::int64_t cycle = 0;
  double accuracy = 0.0;
  std::int64_t comparisons_done = 0;
  std::int64_t comparisons_total_estimate = 0;

  std::int64_t human_total = 0;
  std::int64_t agreement_total = 0;
  std::int64_t human_in_batch = 0;
  std::int64_t agreements_in_batch = 0;
  std::int64_t merges_in_batch = 0;
};

// n * ceil(log2 n): the denominator of the budget term.
inline std::int64_t comparison_budget(std::int64_t n) {
  if (n < 2) return 0;
  std::int64_t levels = 0;
  while ((std::int64_t{1} << levels) < n) ++levels;
  return n * levels;
}

inline double current_threshold(const ThresholdState& ts) {
  const double total = static_cast<double>(ts.comparisons_total_estimate);
  const double remaining = static_cast<double>(std::max<std::int64_t>(
      0, ts.comparisons_total_estimate - ts.comparisons_done));
  const double budget_term = total > 0.0 ? remaining / total : 0.0;
  const double exponent =
      ts.exponent_mode == ExponentMode::kAsWritten ? ts.accuracy : -ts.accuracy;
  return ts.theta0 * (1.0 + ts.alpha * budget_term) *
         std::pow(ts.beta, exponent);
}

// Closes one cycle. Accuracy is the cumulative agreement rate over every
// human judgment so far; it stays put when the batch had none.
inline ThresholdState update_threshold_cycle(ThresholdState ts,
                                             std::int64_t judgments_in_batch,
                                             std::int64_t agreements_in_batch) {
  if (judgments_in_batch < 0 || agreements_in_batch < 0 ||
      agreements_in_batch > judgments_in_batch)
    throw InputError("agreements must be in [0, judgments]");
  ts.human_total += judgments_in_batch;
  ts.agreement_total += agreements_in_batch;
  if (ts.human_total > 0)
    ts.accuracy = static_cast<double>(ts.agreement_total) /
                  static_cast<double>(ts.human_total);
  ++ts.cycle;
  ts.human_in_batch = 0;
  ts.agreements_in_batch = 0;
  ts.merges_in_batch = 0;
  return ts;
}

}  // namespace hilsort
