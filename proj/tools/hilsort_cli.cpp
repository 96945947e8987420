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

// hilsort: bench | preorder | simulate | serve | export
//
// Exit codes: 0 ok, 1 invariant failure or runtime error, 2 usage/input error.

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hilsort/hilsort.hpp"
#include "hilsort/http_service.hpp"

namespace fs = std::filesystem;
using namespace hilsort;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct ModelFlags {
  int k = 5;
  double theta0 = 0.15;
  double alpha = 0.3;
  double beta = 0.9;
  std::string exponent_mode = "as_written";
  double k_factor = 32.0;
  int batch_size = 10;
  int merge_batch = 10;

  void Add(CLI::App* app) {
    app->add_option("--k", k, "number of rating buckets")->capture_default_str();
    app->add_option("--theta0", theta0, "base routing threshold")
        ->capture_default_str();
    app->add_option("--alpha", alpha, "budget weight of the threshold")
        ->capture_default_str();
    app->add_option("--beta", beta, "accuracy decay of the threshold")
        ->capture_default_str();
    app->add_option("--exponent-mode", exponent_mode,
                    "accuracy exponent sign: as_written or inverted")
        ->check(CLI::IsMember({"as_written", "inverted"}))
        ->capture_default_str();
    app->add_option("--k-factor", k_factor, "Elo K factor")->capture_default_str();
    app->add_option("--batch-size", batch_size,
                    "human judgments per threshold cycle")
        ->capture_default_str();
    app->add_option("--merge-batch", merge_batch,
                    "completed merges per threshold cycle")
        ->capture_default_str();
  }

  SessionConfig ToConfig(std::uint64_t rng_seed) const {
    SessionConfig c;
    c.elo_init.bucket_count = k;
    c.elo_init.rng_seed = rng_seed;
    c.k_factor = k_factor;
    c.threshold.theta0 = theta0;
    c.threshold.alpha = alpha;
    c.threshold.beta = beta;
    c.threshold.exponent_mode = parse_exponent_mode(exponent_mode);
    c.threshold.batch_size = batch_size;
    c.threshold.merge_batch = merge_batch;
    c.Validate();
    return c;
  }
};

std::vector<std::uint64_t> seed_list(int count, std::uint64_t first) {
  if (count < 1) throw InputError("--seeds must be >= 1");
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(count));
  std::iota(seeds.begin(), seeds.end(), first);
  return seeds;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) return;
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::string read_text(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  return read_file(path);
}

// ---- bench -----------------------------------------------------------------

struct BenchFlags {
  int n = 30;
  int seeds = 20;
  std::uint64_t first_seed = 0;
  double rho = 0.1;
  double eps = 0.0;
  double tie_threshold = 0.0;
  int depth = 3;
  double score_gap = 0.1;
  double tau = kDefaultTemperature;
  unsigned threads = 0;
  std::vector<double> fraction_band;
  std::string json_out, csv_out;
  bool json = false;
  ModelFlags model;
};

int run_bench(const BenchFlags& f) {
  BenchParams p;
  if (f.n < 2) throw InputError("--n must be >= 2");
  p.n = static_cast<std::size_t>(f.n);
  p.seeds = seed_list(f.seeds, f.first_seed);
  p.oracle.flip_probability = f.eps;
  p.oracle.tie_threshold = f.tie_threshold;
  p.preorder.depth = f.depth;
  p.preorder.per_level_error = f.rho;
  p.preorder.score_gap = f.score_gap;
  p.preorder.tau = f.tau;
  p.session = f.model.ToConfig(0);
  p.threads = f.threads;
  BenchReport rep = run_benchmark(p);

  if (!f.fraction_band.empty()) {
    const double lo = f.fraction_band[0], hi = f.fraction_band[1];
    if (rep.human_fraction < lo || rep.human_fraction > hi) {
      std::ostringstream v;
      v << "human_fraction " << rep.human_fraction << " outside [" << lo << ", "
        << hi << "]";
      rep.violations.push_back(v.str());
    }
  }

  const json doc = to_json(rep);
  write_text(f.json_out, doc.dump(2) + "\n");
  write_text(f.csv_out, bench_csv(rep));
  if (f.json)
    std::cout << doc.dump(2) << '\n';
  else
    std::cout << bench_table(rep);
  return rep.ok() ? kExitOk : kExitFailure;
}

// ---- preorder --------------------------------------------------------------

struct PreorderFlags {
  std::string items, similarities;
  int k = 5;
  std::uint64_t seed = 0;
  bool json = false;
};

int run_preorder_cmd(const PreorderFlags& f) {
  const auto items = parse_items_jsonl(read_text(f.items));
  if (items.empty()) throw InputError("items file has no records", {f.items});
  const auto sims = parse_similarities(read_text(f.similarities));
  check_cross_references(items, sims);
  EloInitConfig cfg;
  cfg.bucket_count = f.k;
  cfg.rng_seed = f.seed;
  const auto pre = run_preorder(items, sims, cfg);

  std::map<int, int> histogram;
  for (int b = 0; b < f.k; ++b) histogram[b] = 0;
  for (const auto& p : pre) ++histogram[p.bucket];

  if (f.json) {
    json rows = json::array();
    for (const auto& p : pre)
      rows.push_back(json{{"item_id", p.item_id},
                      {"group_index", p.group_index},
                      {"depth", p.depth},
                      {"bucket", p.bucket},
                      {"confidence", p.confidence},
                      {"initial_rating", p.initial_rating}});
    json hist = json::array();
    for (const auto& [b, count] : histogram) hist.push_back(count);
    std::cout << json{{"k", f.k}, {"seed", f.seed}, {"items", rows},
                      {"bucket_histogram", hist}}
                     .dump(2)
              << '\n';
    return kExitOk;
  }
  std::cout << std::left << std::setw(24) << "item" << std::right
            << std::setw(6) << "g" << std::setw(6) << "b" << std::setw(10)
            << "conf" << std::setw(12) << "rating" << '\n';
  for (const auto& p : pre)
    std::cout << std::left << std::setw(24) << p.item_id << std::right
              << std::setw(6) << p.group_index << std::setw(6) << p.bucket
              << std::setw(10) << std::fixed << std::setprecision(4)
              << p.confidence << std::setw(12) << std::setprecision(2)
              << p.initial_rating << '\n';
  std::cout << "\nbucket histogram\n";
  for (const auto& [b, count] : histogram)
    std::cout << "  " << b << ": " << std::string(static_cast<std::size_t>(count), '#')
              << " " << count << '\n';
  return kExitOk;
}

// ---- simulate --------------------------------------------------------------

struct SimulateFlags {
  std::string items, similarities;
  int n = 30;
  std::uint64_t seed = 0;
  double rho = 0.1;
  double eps = 0.0;
  double tie_threshold = 0.0;
  int depth = 3;
  double score_gap = 0.1;
  bool json = false;
  bool quiet = false;
  ModelFlags model;
};

int run_simulate(const SimulateFlags& f) {
  std::vector<ItemRecord> items;
  SimilarityTable sims;
  if (!f.items.empty()) {
    items = parse_items_jsonl(read_text(f.items));
    if (f.similarities.empty())
      throw InputError("--similarities is required with --items");
    sims = parse_similarities(read_text(f.similarities));
  } else {
    if (f.n < 1) throw InputError("--n must be >= 1");
    items = make_synthetic_items(static_cast<std::size_t>(f.n), derive_seed(f.seed, 0));
    SyntheticPreorderConfig pcfg;
    pcfg.depth = f.depth;
    pcfg.per_level_error = f.rho;
    pcfg.score_gap = f.score_gap;
    pcfg.rng_seed = derive_seed(f.seed, 1);
    sims = synthesize_similarities(items, pcfg);
  }
  for (const auto& item : items)
    if (!item.ground_truth)
      throw InputError("simulation needs ground_truth on every item", {item.id});

  OracleConfig ocfg;
  ocfg.flip_probability = f.eps;
  ocfg.tie_threshold = f.tie_threshold;
  ocfg.rng_seed = derive_seed(f.seed, 3);
  SimulatedAnnotator annotator(ocfg);

  std::map<std::string, const ItemRecord*> by_id;
  for (const auto& item : items) by_id[item.id] = &item;

  json transcript = json::array();
  auto session = AnnotationSession::Create(
      "simulation", f.model.ToConfig(derive_seed(f.seed, 2)), items, sims);
  std::int64_t clock = 0;
  while (session.pending()) {
    const auto& req = *session.pending();
    const auto& left = items[req.left];
    const auto& right = items[req.right];
    const Outcome o = annotator.Answer(left, right);
    if (!f.quiet) {
      if (f.json) {
        transcript.push_back(json{{"request_id", req.request_id},
                              {"left", left.id},
                              {"right", right.id},
                              {"uncertainty", req.assessment.uncertainty},
                              {"theta", req.theta},
                              {"outcome", std::string(to_string(o))}});
      } else {
        std::cout << "request " << std::setw(5) << req.request_id << "  "
                  << left.id << " vs " << right.id << "  u=" << std::fixed
                  << std::setprecision(4) << req.assessment.uncertainty
                  << " theta=" << req.theta << "  -> " << to_string(o) << '\n';
      }
    }
    session.PostJudgment(req.request_id, o, ++clock);
  }

  const auto rows = session.Ranking();
  std::vector<std::size_t> order;
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < items.size(); ++i) index[items[i].id] = i;
  for (const auto& r : rows) order.push_back(index.at(r.item_id));
  const json stats = session.Stats();

  std::optional<RankingQuality> q;
  if (items.size() >= 2) q = score_ranking(order, items);

  if (f.json) {
    json doc{{"stats", stats},
             {"ranking", ranking_to_json(rows)},
             {"transcript", transcript}};
    if (q)
      doc["quality"] = {{"spearman", q->spearman},
                        {"kendall_tau_b", q->kendall_tau_b},
                        {"pearson", q->pearson}};
    std::cout << doc.dump(2) << '\n';
  } else {
    std::cout << "human queries: " << stats["human"] << '\n'
              << "auto-resolved: " << stats["auto"] << '\n'
              << "comparisons:   " << stats["comparisons"] << '\n';
    if (q)
      std::cout << std::setprecision(6) << "spearman:      " << q->spearman
                << '\n'
                << "kendall tau-b: " << q->kendall_tau_b << '\n'
                << "pearson:       " << q->pearson << '\n';
  }
  const auto worst = merge_sort_worst_case(static_cast<std::int64_t>(items.size()));
  if (stats["comparisons"].get<std::int64_t>() > worst) {
    std::cerr << "error: comparisons exceed the MergeSort worst case\n";
    return kExitFailure;
  }
  return kExitOk;
}

// ---- serve -----------------------------------------------------------------

struct ServeFlags {
  std::string bind = "127.0.0.1";
  int port = 8080;
  std::string data_dir = "./data/sessions";
  std::vector<std::string> cors;
  std::string image_root = ".";
  std::string static_dir;
  bool json = false;
};

httplib::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

int run_serve(const ServeFlags& f) {
  SessionStore store(f.data_dir);
  ServiceOptions opts;
  opts.cors_origins = f.cors;
  opts.image_root = f.image_root;
  opts.static_dir = f.static_dir;
  HttpService service(store, opts);
  httplib::Server server;
  // Exclusive bind: a second instance on the same port must fail.
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  service.Register(server);
  if (!server.bind_to_port(f.bind, f.port)) {
    std::cerr << "error: cannot bind " << f.bind << ":" << f.port
              << " (address in use or not permitted)\n";
    return kExitFailure;
  }
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  if (f.json)
    std::cout << json{{"listening", f.bind + ":" + std::to_string(f.port)},
                      {"data_dir", fs::absolute(f.data_dir).string()}}
                     .dump()
              << std::endl;
  else
    std::cout << "listening on http://" << f.bind << ":" << f.port
              << "  data dir " << fs::absolute(f.data_dir).string() << std::endl;
  const bool ok = server.listen_after_bind();
  g_server = nullptr;
  return ok ? kExitOk : kExitFailure;
}

// ---- export ----------------------------------------------------------------

struct ExportFlags {
  std::string data_dir = "./data/sessions";
  std::string session;
  std::string out = "-";
  std::string ranking_csv;
  bool json = false;
};

int run_export(const ExportFlags& f) {
  if (!fs::exists(f.data_dir)) throw NotFoundError("no data dir " + f.data_dir);
  SessionStore store(f.data_dir);
  const json doc = store.Export(f.session);
  if (!f.ranking_csv.empty()) {
    const json ranking = store.Ranking(f.session);
    std::ostringstream csv;
    csv << std::setprecision(17)
        << "rank,item_id,display_ref,rating,initial_rating,bucket\n";
    for (const auto& row : ranking["ranking"])
      csv << row["rank"] << ',' << row["item_id"].get<std::string>() << ','
          << row["display_ref"].get<std::string>() << ','
          << row["rating"].get<double>() << ','
          << row["initial_rating"].get<double>() << ',' << row["bucket"] << '\n';
    write_text(f.ranking_csv, csv.str());
  }
  write_text(f.out, f.json ? doc.dump() + "\n" : doc.dump(2) + "\n");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Uncertainty-routed human-in-the-loop ranking"};
  app.require_subcommand(1);

  BenchFlags bench;
  auto* b = app.add_subcommand("bench", "simulated benchmark over seeds");
  b->add_option("--n", bench.n, "items per run")->capture_default_str();
  b->add_option("--seeds", bench.seeds, "number of seeds")->capture_default_str();
  b->add_option("--first-seed", bench.first_seed, "first seed")->capture_default_str();
  b->add_option("--rho", bench.rho, "per-level pre-order error")->capture_default_str();
  b->add_option("--eps", bench.eps, "annotator flip probability")->capture_default_str();
  b->add_option("--tie-threshold", bench.tie_threshold,
                "annotator answers equal below this truth gap")
      ->capture_default_str();
  b->add_option("--depth", bench.depth, "pre-order tree depth")->capture_default_str();
  b->add_option("--score-gap", bench.score_gap, "synthetic similarity gap")
      ->capture_default_str();
  b->add_option("--tau", bench.tau, "softmax temperature")->capture_default_str();
  b->add_option("--threads", bench.threads, "worker threads, 0 = one per seed")
      ->capture_default_str();
  b->add_option("--fraction-band", bench.fraction_band,
                "fail unless human_fraction lies in LO HI")
      ->expected(2);
  b->add_option("--json-out", bench.json_out, "write report JSON here");
  b->add_option("--csv-out", bench.csv_out, "write per-seed CSV here");
  b->add_flag("--json", bench.json, "print the JSON report");
  bench.model.Add(b);

  PreorderFlags pre;
  auto* p = app.add_subcommand("preorder", "bucket and rating report for a data set");
  p->add_option("--items", pre.items, "items.jsonl")->required();
  p->add_option("--similarities", pre.similarities, "similarities.json")->required();
  p->add_option("--k", pre.k, "number of rating buckets")->capture_default_str();
  p->add_option("--seed", pre.seed, "rating noise seed")->capture_default_str();
  p->add_flag("--json", pre.json, "print JSON");

  SimulateFlags sim;
  auto* s = app.add_subcommand("simulate", "headless session with a simulated annotator");
  s->add_option("--items", sim.items, "items.jsonl with ground_truth (default: synthetic)");
  s->add_option("--similarities", sim.similarities, "similarities.json");
  s->add_option("--n", sim.n, "synthetic item count")->capture_default_str();
  s->add_option("--seed", sim.seed, "seed")->capture_default_str();
  s->add_option("--rho", sim.rho, "per-level pre-order error")->capture_default_str();
  s->add_option("--eps", sim.eps, "annotator flip probability")->capture_default_str();
  s->add_option("--tie-threshold", sim.tie_threshold,
                "annotator answers equal below this truth gap")
      ->capture_default_str();
  s->add_option("--depth", sim.depth, "pre-order tree depth")->capture_default_str();
  s->add_option("--score-gap", sim.score_gap, "synthetic similarity gap")
      ->capture_default_str();
  s->add_flag("--quiet", sim.quiet, "omit the per-request transcript");
  s->add_flag("--json", sim.json, "print JSON");
  sim.model.Add(s);

  ServeFlags serve;
  auto* v = app.add_subcommand("serve", "HTTP/JSON annotation service");
  v->add_option("--bind", serve.bind, "bind address")->capture_default_str();
  v->add_option("--port", serve.port, "port")->capture_default_str();
  v->add_option("--data-dir", serve.data_dir, "session directory, created if missing")
      ->capture_default_str();
  v->add_option("--cors", serve.cors, "allowed CORS origin, repeatable; * for any");
  v->add_option("--image-root", serve.image_root, "root for relative display_ref paths")
      ->capture_default_str();
  v->add_option("--static-dir", serve.static_dir, "UI assets served under /ui");
  v->add_flag("--json", serve.json, "print the startup line as JSON");

  ExportFlags exp;
  auto* e = app.add_subcommand("export", "export a stored session");
  e->add_option("--data-dir", exp.data_dir, "session directory")->capture_default_str();
  e->add_option("--session", exp.session, "session id")->required();
  e->add_option("--out", exp.out, "output file, - for stdout")->capture_default_str();
  e->add_option("--ranking-csv", exp.ranking_csv, "also write the ranking as CSV");
  e->add_flag("--json", exp.json, "compact JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*b) return run_bench(bench);
    if (*p) return run_preorder_cmd(pre);
    if (*s) return run_simulate(sim);
    if (*v) return run_serve(serve);
    if (*e) return run_export(exp);
  } catch (const InputError& err) {
    std::cerr << "error: " << err.what() << '\n';
    for (const auto& d : err.details()) std::cerr << "  " << d << '\n';
    return kExitUsage;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}
