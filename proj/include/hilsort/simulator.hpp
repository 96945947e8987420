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

// Desk-scale benchmark harness. Ground truth stands in for the expert, a
// quantile bit-path with per-level flips stands in for the zero-shot model,
// and each seed runs the routed sort next to an all-human baseline on the
// same initial sequence.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hilsort/config.hpp"
#include "hilsort/correlation.hpp"
#include "hilsort/error.hpp"
#include "hilsort/merge_machine.hpp"
#include "hilsort/preorder.hpp"
#include "hilsort/rating.hpp"
#include "hilsort/rng.hpp"
#include "hilsort/sorter.hpp"
#include "json.hpp"

namespace hilsort {

struct OracleConfig {
  double flip_probability = 0.0;
  double tie_threshold = 0.0;
  std::uint64_t rng_seed = 0;

  void Validate() const {
    if (!(flip_probability >= 0.0 && flip_probability < 0.5))
      throw InputError("flip_probability must be in [0, 0.5)");
    if (!(tie_threshold >= 0.0)) throw InputError("tie_threshold must be >= 0");
  }
};

struct SyntheticPreorderConfig {
  int depth = 3;
  double per_level_error = 0.1;
  double score_gap = 0.1;
  double tau = kDefaultTemperature;
  std::uint64_t rng_seed = 0;

  void Validate() const {
    if (depth < 1 || depth > kMaxDepth)
      throw InputError("depth must be in [1, " + std::to_string(kMaxDepth) + "]");
    if (!(per_level_error >= 0.0 && per_level_error < 0.5))
      throw InputError("per_level_error must be in [0, 0.5)");
    if (!(score_gap > 0.0 && score_gap <= 0.5))
      throw InputError("score_gap must be in (0, 0.5]");
  }
};

// Independent streams for one benchmark seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  Xoshiro256 mix(seed ^ (0xD1B54A32D192ED03ULL * (stream + 1)));
  return mix();
}

// A noisy annotator answering from ground truth. "equal" when the values
// are within tie_threshold (checked before any flip); otherwise the truthful
// answer is flipped with probability flip_probability.
class SimulatedAnnotator {
 public:
  explicit SimulatedAnnotator(OracleConfig cfg) : cfg_(cfg), rng_(cfg.rng_seed) {
    cfg_.Validate();
  }

  Outcome Answer(double left_truth, double right_truth) {
    if (std::abs(left_truth - right_truth) <= cfg_.tie_threshold)
      return Outcome::kEqual;
    const Outcome truthful =
        left_truth > right_truth ? Outcome::kLeftFirst : Outcome::kRightFirst;
    if (cfg_.flip_probability > 0.0 && rng_.bernoulli(cfg_.flip_probability))
      return truthful == Outcome::kLeftFirst ? Outcome::kRightFirst
                                             : Outcome::kLeftFirst;
    return truthful;
  }

  Outcome Answer(const ItemRecord& left, const ItemRecord& right) {
    if (!left.ground_truth || !right.ground_truth)
      throw InputError("simulated annotator needs ground truth",
                       {left.ground_truth ? right.id : left.id});
    return Answer(*left.ground_truth, *right.ground_truth);
  }

 private:
  OracleConfig cfg_;
  Xoshiro256 rng_;
};

// n items with distinct ground truths 1..n in random order.
inline std::vector<ItemRecord> make_synthetic_items(std::size_t n,
                                                    std::uint64_t seed) {
  std::vector<double> truth(n);
  std::iota(truth.begin(), truth.end(), 1.0);
  Xoshiro256 rng(seed);
  Shuffle(truth, rng);
  std::vector<ItemRecord> items(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::ostringstream id;
    id << "item_" << std::setw(4) << std::setfill('0') << i;
    items[i].id = id.str();
    items[i].display_ref = "synthetic/" + items[i].id + ".png";
    items[i].ground_truth = truth[i];
  }
  return items;
}

// Per item: G = floor(q * 2^d) where q is the fraction of items with strictly
// smaller ground truth. Level l carries bit (l-1) of G, flipped with
// probability per_level_error; the chosen side scores base + score_gap.
inline SimilarityTable synthesize_similarities(
    const std::vector<ItemRecord>& items, const SyntheticPreorderConfig& cfg) {
  cfg.Validate();
  std::vector<double> truth;
  truth.reserve(items.size());
  for (const auto& item : items) {
    if (!item.ground_truth)
      throw InputError("synthetic pre-order needs ground truth", {item.id});
    truth.push_back(*item.ground_truth);
  }
  if (truth.empty()) throw InputError("no items to synthesize");
  const auto [lo, hi] = std::minmax_element(truth.begin(), truth.end());
  if (truth.size() > 1 && *lo == *hi)
    throw InputError("ground truth range is degenerate");

  std::vector<double> sorted = truth;
  std::sort(sorted.begin(), sorted.end());
  const std::uint64_t groups = std::uint64_t{1} << cfg.depth;
  const auto n = static_cast<std::uint64_t>(items.size());

  SimilarityTable table;
  table.tau = cfg.tau;
  Xoshiro256 rng(cfg.rng_seed);
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto below = static_cast<std::uint64_t>(
        std::lower_bound(sorted.begin(), sorted.end(), truth[i]) -
        sorted.begin());
    const std::uint64_t g = below * groups / n;
    std::vector<LevelScores> levels;
    levels.reserve(static_cast<std::size_t>(cfg.depth));
    for (int l = 0; l < cfg.depth; ++l) {
      int bit = static_cast<int>((g >> l) & 1U);
      if (rng.bernoulli(cfg.per_level_error)) bit = 1 - bit;
      const double base = rng.uniform(0.15, 0.30);
      LevelScores s{base, base};
      s[static_cast<std::size_t>(bit)] += cfg.score_gap;
      levels.push_back(s);
    }
    table.items.emplace(items[i].id, std::move(levels));
  }
  return table;
}

// Recursive top-down MergeSort with a caller-supplied "a goes first"
// predicate; the benchmark uses it to re-run a recorded outcome function.
template <typename T, typename LeftFirst>
std::int64_t classical_merge_sort(std::vector<T>& v, LeftFirst&& left_first) {
  std::int64_t comparisons = 0;
  std::vector<T> buf;
  std::function<void(std::size_t, std::size_t)> sort =
      [&](std::size_t lo, std::size_t hi) {
        if (hi - lo < 2) return;
        const std::size_t mid = lo + (hi - lo) / 2;
        sort(lo, mid);
        sort(mid, hi);
        buf.clear();
        std::size_t i = lo, j = mid;
        while (i < mid && j < hi) {
          ++comparisons;
          if (left_first(v[i], v[j]))
            buf.push_back(v[i++]);
          else
            buf.push_back(v[j++]);
        }
        while (i < mid) buf.push_back(v[i++]);
        while (j < hi) buf.push_back(v[j++]);
        std::copy(buf.begin(), buf.end(), v.begin() + static_cast<std::ptrdiff_t>(lo));
      };
  sort(0, v.size());
  return comparisons;
}

struct PipelineRun {
  SortStats stats;
  std::vector<std::size_t> initial_order;
  std::vector<std::size_t> ranking;
  // Outcome of every compared pair, keyed (left, right) as presented.
  std::map<std::pair<std::size_t, std::size_t>, Outcome> outcomes;
};

// Runs the routed sort to completion, answering human requests with
// `annotator`. Operates on the sorter directly (no event log).
inline PipelineRun run_pipeline(const std::vector<ItemRecord>& items,
                                const std::vector<PreorderResult>& pre,
                                const SessionConfig& cfg,
                                SimulatedAnnotator& annotator) {
  EloState elo(cfg.k_factor);
  for (const auto& p : pre) elo.Add(p.item_id, p.initial_rating);
  ThresholdState ts = cfg.InitialThreshold(items.size());
  auto sorter = UncertaintySorter::Start(pre);
  PipelineRun run;
  run.initial_order = sorter.initial_order();
  std::map<std::int64_t, std::pair<std::size_t, std::size_t>> requests;
  auto sink = [&](const SortEvent& e) {
    if (const auto* issued = std::get_if<RequestIssued>(&e)) {
      requests[issued->request.request_id] = {issued->request.left,
                                              issued->request.right};
    } else if (const auto* applied = std::get_if<JudgmentApplied>(&e)) {
      run.outcomes[requests.at(applied->judgment.request_id)] =
          applied->judgment.outcome;
    }
  };
  while (true) {
    auto step = sorter.Next(elo, pre, ts, cfg.priority, sink);
    if (step.done) break;
    const auto& req = *step.request;
    const Outcome answer = annotator.Answer(items[req.left], items[req.right]);
    sorter.Submit({req.request_id, answer, Route::kHuman, 0}, elo, ts, sink);
  }
  run.stats = sorter.stats();
  run.ranking = sorter.Ranking();
  return run;
}

// Correlations between a ranking (rank 1 first) and ground truth.
struct RankingQuality {
  double spearman = 0.0;
  double kendall_tau_b = 0.0;
  double pearson = 0.0;
};

inline RankingQuality score_ranking(const std::vector<std::size_t>& ranking,
                                    const std::vector<ItemRecord>& items) {
  std::vector<double> position_score(ranking.size());
  std::vector<double> truth(ranking.size());
  for (std::size_t pos = 0; pos < ranking.size(); ++pos) {
    position_score[pos] = static_cast<double>(ranking.size() - pos);
    truth[pos] = items[ranking[pos]].ground_truth.value();
  }
  return {spearman(position_score, truth), kendall_tau_b(position_score, truth),
          pearson(position_score, truth)};
}

struct SeedResult {
  std::uint64_t seed = 0;
  std::int64_t baseline_human = 0;
  std::int64_t human = 0;
  std::int64_t automatic = 0;
  double human_fraction = 0.0;
  RankingQuality quality;
  RankingQuality baseline_quality;
  // The recorded outcome function replayed through a reference MergeSort
  // gives the same comparison count and order.
  bool schedule_consistent = false;
  bool within_worst_case = false;
};

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;
};

inline MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd out;
  if (xs.empty()) return out;
  out.mean = std::accumulate(xs.begin(), xs.end(), 0.0) /
             static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return out;
}

struct BenchReport {
  std::int64_t n = 0;
  std::int64_t exhaustive_count = 0;
  MeanStd all_human_mergesort_count;
  MeanStd routed_human_count;
  MeanStd routed_auto_count;
  double human_fraction = 0.0;
  MeanStd spearman;
  MeanStd kendall_tau_b;
  MeanStd pearson;
  MeanStd baseline_spearman;
  std::vector<std::uint64_t> seeds_used;
  std::vector<SeedResult> per_seed;
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

struct BenchParams {
  std::size_t n = 30;
  std::vector<std::uint64_t> seeds{0};
  OracleConfig oracle;
  SyntheticPreorderConfig preorder;
  SessionConfig session;
  unsigned threads = 0;  // 0: one task per seed
};

inline SeedResult run_seed(const BenchParams& p, std::uint64_t seed) {
  SeedResult r;
  r.seed = seed;
  const auto items = make_synthetic_items(p.n, derive_seed(seed, 0));
  SyntheticPreorderConfig pcfg = p.preorder;
  pcfg.rng_seed = derive_seed(seed, 1);
  const auto sims = synthesize_similarities(items, pcfg);
  SessionConfig scfg = p.session;
  scfg.elo_init.rng_seed = derive_seed(seed, 2);
  const auto pre = run_preorder(items, sims, scfg.elo_init);

  OracleConfig ocfg = p.oracle;
  ocfg.rng_seed = derive_seed(seed, 3);

  SessionConfig baseline_cfg = scfg;
  baseline_cfg.threshold.theta0 = 0.0;
  SimulatedAnnotator baseline_annotator(ocfg);
  const auto baseline = run_pipeline(items, pre, baseline_cfg, baseline_annotator);

  SimulatedAnnotator annotator(ocfg);
  const auto run = run_pipeline(items, pre, scfg, annotator);

  r.baseline_human = baseline.stats.human;
  r.human = run.stats.human;
  r.automatic = run.stats.automatic;
  r.human_fraction = run.stats.total() > 0
                         ? static_cast<double>(run.stats.human) /
                               static_cast<double>(run.stats.total())
                         : 0.0;
  r.quality = score_ranking(run.ranking, items);
  r.baseline_quality = score_ranking(baseline.ranking, items);

  auto replay = run.initial_order;
  const auto replayed = classical_merge_sort(
      replay, [&](std::size_t a, std::size_t b) {
        auto it = run.outcomes.find({a, b});
        return it != run.outcomes.end() && it->second != Outcome::kRightFirst;
      });
  r.schedule_consistent =
      replayed == run.stats.total() &&
      static_cast<std::int64_t>(run.outcomes.size()) == run.stats.total() &&
      replay == run.ranking;
  const auto worst = merge_sort_worst_case(static_cast<std::int64_t>(p.n));
  r.within_worst_case =
      run.stats.total() <= worst && baseline.stats.total() <= worst;
  return r;
}

inline BenchReport run_benchmark(const BenchParams& p) {
  if (p.n < 2) throw InputError("benchmark needs n >= 2");
  if (p.seeds.empty()) throw InputError("benchmark needs at least one seed");
  p.oracle.Validate();
  p.preorder.Validate();
  p.session.Validate();

  std::vector<SeedResult> results(p.seeds.size());
  const std::size_t workers =
      p.threads == 0 ? p.seeds.size() : std::max<std::size_t>(1, p.threads);
  for (std::size_t start = 0; start < p.seeds.size(); start += workers) {
    std::vector<std::future<SeedResult>> batch;
    const std::size_t stop = std::min(p.seeds.size(), start + workers);
    for (std::size_t i = start; i < stop; ++i)
      batch.push_back(std::async(std::launch::async, run_seed, std::cref(p),
                                 p.seeds[i]));
    for (std::size_t i = start; i < stop; ++i) results[i] = batch[i - start].get();
  }

  BenchReport rep;
  rep.n = static_cast<std::int64_t>(p.n);
  rep.exhaustive_count = rep.n * (rep.n - 1) / 2;
  rep.seeds_used = p.seeds;
  rep.per_seed = results;
  std::vector<double> base, human, autos, sp, kt, pe, bsp;
  for (const auto& r : results) {
    base.push_back(static_cast<double>(r.baseline_human));
    human.push_back(static_cast<double>(r.human));
    autos.push_back(static_cast<double>(r.automatic));
    sp.push_back(r.quality.spearman);
    kt.push_back(r.quality.kendall_tau_b);
    pe.push_back(r.quality.pearson);
    bsp.push_back(r.baseline_quality.spearman);
    if (!r.schedule_consistent)
      rep.violations.push_back("seed " + std::to_string(r.seed) +
                               ": schedule replay mismatch");
    if (!r.within_worst_case)
      rep.violations.push_back("seed " + std::to_string(r.seed) +
                               ": comparisons exceed MergeSort worst case");
  }
  rep.all_human_mergesort_count = mean_std(base);
  rep.routed_human_count = mean_std(human);
  rep.routed_auto_count = mean_std(autos);
  const double denom = rep.routed_human_count.mean + rep.routed_auto_count.mean;
  rep.human_fraction = denom > 0.0 ? rep.routed_human_count.mean / denom : 0.0;
  rep.spearman = mean_std(sp);
  rep.kendall_tau_b = mean_std(kt);
  rep.pearson = mean_std(pe);
  rep.baseline_spearman = mean_std(bsp);
  return rep;
}

inline json to_json(const MeanStd& m) {
  return {{"mean", m.mean}, {"std", m.stddev}};
}

inline json to_json(const BenchReport& r) {
  json per_seed = json::array();
  for (const auto& s : r.per_seed)
    per_seed.push_back({{"seed", s.seed},
                        {"all_human_mergesort_count", s.baseline_human},
                        {"routed_human_count", s.human},
                        {"routed_auto_count", s.automatic},
                        {"human_fraction", s.human_fraction},
                        {"spearman", s.quality.spearman},
                        {"kendall_tau_b", s.quality.kendall_tau_b},
                        {"pearson", s.quality.pearson},
                        {"baseline_spearman", s.baseline_quality.spearman},
                        {"schedule_consistent", s.schedule_consistent},
                        {"within_worst_case", s.within_worst_case}});
  return {{"n", r.n},
          {"exhaustive_count", r.exhaustive_count},
          {"all_human_mergesort_count", to_json(r.all_human_mergesort_count)},
          {"routed_human_count", to_json(r.routed_human_count)},
          {"routed_auto_count", to_json(r.routed_auto_count)},
          {"human_fraction", r.human_fraction},
          {"spearman", to_json(r.spearman)},
          {"kendall_tau_b", to_json(r.kendall_tau_b)},
          {"pearson", to_json(r.pearson)},
          {"baseline_spearman", to_json(r.baseline_spearman)},
          {"seeds_used", r.seeds_used},
          {"per_seed", std::move(per_seed)},
          {"violations", r.violations}};
}

inline std::string bench_csv(const BenchReport& r) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "seed,n,all_human_mergesort_count,routed_human_count,"
         "routed_auto_count,human_fraction,spearman,kendall_tau_b,pearson,"
         "baseline_spearman,schedule_consistent,within_worst_case\n";
  for (const auto& s : r.per_seed)
    out << s.seed << ',' << r.n << ',' << s.baseline_human << ',' << s.human
        << ',' << s.automatic << ',' << s.human_fraction << ','
        << s.quality.spearman << ',' << s.quality.kendall_tau_b << ','
        << s.quality.pearson << ',' << s.baseline_quality.spearman << ','
        << (s.schedule_consistent ? 1 : 0) << ','
        << (s.within_worst_case ? 1 : 0) << '\n';
  return out.str();
}

inline std::string bench_table(const BenchReport& r) {
  std::ostringstream out;
  auto ms = [](const MeanStd& m, int prec) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(prec) << m.mean << " +/- " << m.stddev;
    return s.str();
  };
  out << std::left;
  out << std::setw(28) << "n" << r.n << '\n';
  out << std::setw(28) << "seeds" << r.seeds_used.size() << '\n';
  out << std::setw(28) << "exhaustive comparisons" << r.exhaustive_count << '\n';
  out << std::setw(28) << "all-human mergesort" << ms(r.all_human_mergesort_count, 1) << '\n';
  out << std::setw(28) << "routed: human queries" << ms(r.routed_human_count, 1) << '\n';
  out << std::setw(28) << "routed: auto-resolved" << ms(r.routed_auto_count, 1) << '\n';
  out << std::setw(28) << "human fraction" << std::fixed << std::setprecision(4)
      << r.human_fraction << '\n';
  out << std::setw(28) << "spearman" << ms(r.spearman, 4) << '\n';
  out << std::setw(28) << "kendall tau-b" << ms(r.kendall_tau_b, 4) << '\n';
  out << std::setw(28) << "pearson" << ms(r.pearson, 4) << '\n';
  out << std::setw(28) << "baseline spearman" << ms(r.baseline_spearman, 4) << '\n';
  out << '\n'
      << std::right << std::setw(20) << "seed" << std::setw(10) << "baseline"
      << std::setw(8) << "human" << std::setw(8) << "auto" << std::setw(10)
      << "frac" << std::setw(10) << "spearman" << '\n';
  for (const auto& s : r.per_seed)
    out << std::setw(20) << s.seed << std::setw(10) << s.baseline_human
        << std::setw(8) << s.human << std::setw(8) << s.automatic
        << std::setw(10) << std::fixed << std::setprecision(4)
        << s.human_fraction << std::setw(10) << s.quality.spearman << '\n';
  if (!r.violations.empty()) {
    out << "\nviolations:\n";
    for (const auto& v : r.violations) out << "  " << v << '\n';
  }
  return out.str();
}

}  // namespace hilsort
