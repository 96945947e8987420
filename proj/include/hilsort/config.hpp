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

#include <cstdint>
#include <string>
#include <vector>

#include "hilsort/error.hpp"
#include "hilsort/preorder.hpp"
#include "hilsort/rating.hpp"
#include "json.hpp"

namespace hilsort {

using json = nlohmann::json;

struct ThresholdParams {
  double theta0 = 0.15;
  double alpha = 0.3;
  double beta = 0.9;
  ExponentMode exponent_mode = ExponentMode::kAsWritten;
  int batch_size = 10;
  int merge_batch = 10;
};

// Everything a session needs besides its data. Defaults are the published
// operating point: K=32, r_base in [1200, 1800], delta=75, k=5,
// theta0=0.15, alpha=0.3, beta=0.9, gamma=1.2, phi = 2 - avg_conf.
struct SessionConfig {
  EloInitConfig elo_init;
  double k_factor = 32.0;
  PriorityParams priority;
  ThresholdParams threshold;

  void Validate() const {
    std::vector<std::string> problems;
    try {
      elo_init.Validate();
    } catch (const InputError& e) {
      problems.push_back(std::string("elo_init: ") + e.what());
    }
    if (!(k_factor > 0.0)) problems.push_back("k_factor: must be > 0");
    if (!(priority.cross_bucket_gamma > 0.0))
      problems.push_back("priority.cross_bucket_gamma: must be > 0");
    if (!(threshold.theta0 >= 0.0))
      problems.push_back("threshold.theta0: must be >= 0");
    if (!(threshold.alpha >= 0.0))
      problems.push_back("threshold.alpha: must be >= 0");
    if (!(threshold.beta > 0.0 && threshold.beta < 1.0))
      problems.push_back("threshold.beta: must be in (0, 1)");
    if (threshold.batch_size < 1)
      problems.push_back("threshold.batch_size: must be >= 1");
    if (threshold.merge_batch < 1)
      problems.push_back("threshold.merge_batch: must be >= 1");
    if (!problems.empty()) throw InputError("invalid session config", problems);
  }

  ThresholdState InitialThreshold(std::size_t n) const {
    ThresholdState ts;
    ts.theta0 = threshold.theta0;
    ts.alpha = threshold.alpha;
    ts.beta = threshold.beta;
    ts.exponent_mode = threshold.exponent_mode;
    ts.batch_size = threshold.batch_size;
    ts.merge_batch = threshold.merge_batch;
    ts.comparisons_total_estimate =
        comparison_budget(static_cast<std::int64_t>(n));
    return ts;
  }
};

inline json to_json(const SessionConfig& c) {
  return {
      {"elo_init",
       {{"bucket_count", c.elo_init.bucket_count},
        {"rating_base_min", c.elo_init.rating_base_min},
        {"rating_base_max", c.elo_init.rating_base_max},
        {"noise_halfwidth", c.elo_init.noise_halfwidth},
        {"rng_seed", c.elo_init.rng_seed}}},
      {"k_factor", c.k_factor},
      {"priority",
       {{"cross_bucket_gamma", c.priority.cross_bucket_gamma},
        {"confidence_offset", c.priority.confidence_offset}}},
      {"threshold",
       {{"theta0", c.threshold.theta0},
        {"alpha", c.threshold.alpha},
        {"beta", c.threshold.beta},
        {"exponent_mode", std::string(to_string(c.threshold.exponent_mode))},
        {"batch_size", c.threshold.batch_size},
        {"merge_batch", c.threshold.merge_batch}}},
  };
}

// Missing keys keep their defaults; present keys must have the right type.
inline SessionConfig session_config_from_json(const json& j) {
  SessionConfig c;
  if (j.is_null()) return c;
  if (!j.is_object()) throw InputError("config must be a JSON object");
  std::vector<std::string> problems;
  auto read = [&](const json& obj, const char* section, const char* key,
                  auto& field) {
    if (!obj.contains(key)) return;
    using Field = std::decay_t<decltype(field)>;
    try {
      field = obj.at(key).template get<Field>();
    } catch (const json::exception&) {
      problems.push_back(std::string(section) + key + ": wrong type");
    }
  };
  if (j.contains("elo_init")) {
    const auto& e = j["elo_init"];
    read(e, "elo_init.", "bucket_count", c.elo_init.bucket_count);
    read(e, "elo_init.", "rating_base_min", c.elo_init.rating_base_min);
    read(e, "elo_init.", "rating_base_max", c.elo_init.rating_base_max);
    read(e, "elo_init.", "noise_halfwidth", c.elo_init.noise_halfwidth);
    read(e, "elo_init.", "rng_seed", c.elo_init.rng_seed);
  }
  read(j, "", "k_factor", c.k_factor);
  if (j.contains("priority")) {
    const auto& p = j["priority"];
    read(p, "priority.", "cross_bucket_gamma", c.priority.cross_bucket_gamma);
    read(p, "priority.", "confidence_offset", c.priority.confidence_offset);
  }
  if (j.contains("threshold")) {
    const auto& t = j["threshold"];
    read(t, "threshold.", "theta0", c.threshold.theta0);
    read(t, "threshold.", "alpha", c.threshold.alpha);
    read(t, "threshold.", "beta", c.threshold.beta);
    read(t, "threshold.", "batch_size", c.threshold.batch_size);
    read(t, "threshold.", "merge_batch", c.threshold.merge_batch);
    if (t.contains("exponent_mode")) {
      try {
        c.threshold.exponent_mode =
            parse_exponent_mode(t["exponent_mode"].get<std::string>());
      } catch (const std::exception&) {
        problems.push_back(
            "threshold.exponent_mode: must be as_written or inverted");
      }
    }
  }
  if (!problems.empty()) throw InputError("invalid session config", problems);
  c.Validate();
  return c;
}

}  // namespace hilsort
