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

// Readers and writers for the on-disk inputs:
//
//   items.jsonl        {"id": str, "display_ref": str, "ground_truth": num|null}
//   similarities.json  {"tau": num, "items": {"<id>": {"levels": [[s0, s1], ...]}}}
//   prompt_tree.json   {"domain": str, "nodes": [{"level": int,
//                        "path": [0|1, ...], "prompts": [str, str]}]}

#pragma once

#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hilsort/error.hpp"
#include "hilsort/preorder.hpp"
#include "json.hpp"

namespace hilsort {

using json = nlohmann::json;

inline std::vector<ItemRecord> parse_items_jsonl(std::string_view text) {
  std::vector<ItemRecord> items;
  std::vector<std::string> problems;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(line_no);
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
      problems.push_back(where + ": not a JSON object");
      continue;
    }
    ItemRecord item;
    if (!obj.contains("id") || !obj["id"].is_string() ||
        obj["id"].get<std::string>().empty()) {
      problems.push_back(where + ": 'id' must be a non-empty string");
      continue;
    }
    item.id = obj["id"].get<std::string>();
    if (obj.contains("display_ref")) {
      if (!obj["display_ref"].is_string()) {
        problems.push_back(where + ": 'display_ref' must be a string");
        continue;
      }
      item.display_ref = obj["display_ref"].get<std::string>();
    }
    if (obj.contains("ground_truth") && !obj["ground_truth"].is_null()) {
      if (!obj["ground_truth"].is_number()) {
        problems.push_back(where + ": 'ground_truth' must be a number or null");
        continue;
      }
      item.ground_truth = obj["ground_truth"].get<double>();
    }
    if (!seen.insert(item.id).second) {
      problems.push_back(where + ": duplicate item id '" + item.id + "'");
      continue;
    }
    items.push_back(std::move(item));
  }
  if (!problems.empty()) throw InputError("invalid items.jsonl", problems);
  return items;
}

inline std::string items_to_jsonl(const std::vector<ItemRecord>& items) {
  std::string out;
  for (const auto& item : items) {
    json obj{{"id", item.id}, {"display_ref", item.display_ref}};
    obj["ground_truth"] =
        item.ground_truth ? json(*item.ground_truth) : json(nullptr);
    out += obj.dump();
    out += '\n';
  }
  return out;
}

inline SimilarityTable parse_similarities(const json& doc) {
  std::vector<std::string> problems;
  SimilarityTable table;
  if (!doc.is_object()) throw InputError("similarities must be a JSON object");
  if (doc.contains("tau")) {
    if (!doc["tau"].is_number() || !(doc["tau"].get<double>() > 0.0))
      problems.push_back("tau: must be a number > 0");
    else
      table.tau = doc["tau"].get<double>();
  }
  if (!doc.contains("items") || !doc["items"].is_object())
    throw InputError("invalid similarities.json", {"items: missing or not an object"});
  for (const auto& [id, rec] : doc["items"].items()) {
    const std::string where = "items." + id;
    if (!rec.is_object() || !rec.contains("levels") ||
        !rec["levels"].is_array()) {
      problems.push_back(where + ": expected {\"levels\": [[s0, s1], ...]}");
      continue;
    }
    const auto& levels = rec["levels"];
    if (levels.empty() || levels.size() > static_cast<std::size_t>(kMaxDepth)) {
      problems.push_back(where + ": level count must be in [1, " +
                         std::to_string(kMaxDepth) + "]");
      continue;
    }
    std::vector<LevelScores> rows;
    bool ok = true;
    for (std::size_t l = 0; l < levels.size() && ok; ++l) {
      const auto& row = levels[l];
      if (!row.is_array() || row.size() != 2 || !row[0].is_number() ||
          !row[1].is_number()) {
        problems.push_back(where + ".levels[" + std::to_string(l) +
                           "]: expected exactly two numbers");
        ok = false;
        break;
      }
      LevelScores s{row[0].get<double>(), row[1].get<double>()};
      for (double v : s) {
        if (!std::isfinite(v) || v < -1.0 || v > 1.0) {
          problems.push_back(where + ".levels[" + std::to_string(l) +
                             "]: cosine similarity outside [-1, 1]");
          ok = false;
          break;
        }
      }
      rows.push_back(s);
    }
    if (ok) table.items.emplace(id, std::move(rows));
  }
  if (!problems.empty()) throw InputError("invalid similarities.json", problems);
  return table;
}

inline SimilarityTable parse_similarities(std::string_view text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw InputError("similarities.json is not valid JSON");
  return parse_similarities(doc);
}

inline SimilarityTable parse_similarities(const std::string& text) {
  return parse_similarities(std::string_view(text));
}

inline SimilarityTable parse_similarities(const char* text) {
  return parse_similarities(std::string_view(text));
}

inline json similarities_to_json(const SimilarityTable& table) {
  json items = json::object();
  for (const auto& [id, rows] : table.items) {
    json levels = json::array();
    for (const auto& s : rows) levels.push_back({s[0], s[1]});
    items[id] = {{"levels", std::move(levels)}};
  }
  return {{"tau", table.tau}, {"items", std::move(items)}};
}

// Every item needs a similarity record and vice versa.
inline void check_cross_references(const std::vector<ItemRecord>& items,
                                   const SimilarityTable& sims) {
  std::vector<std::string> problems;
  std::set<std::string> ids;
  for (const auto& item : items) {
    ids.insert(item.id);
    if (!sims.items.contains(item.id))
      problems.push_back("missing similarities for item '" + item.id + "'");
  }
  for (const auto& [id, rows] : sims.items) {
    if (!ids.contains(id))
      problems.push_back("similarities for unknown item '" + id + "'");
  }
  if (!problems.empty())
    throw InputError("items and similarities do not match", problems);
}

struct PromptNode {
  int level = 1;
  std::vector<int> path;
  std::array<std::string, 2> prompts;
};

struct PromptTree {
  std::string domain;
  std::vector<PromptNode> nodes;
};

// One root at level 1; every deeper node hangs off an existing parent and
// carries the binary path that leads to it (length = level - 1).
inline void validate_prompt_tree(const PromptTree& tree) {
  std::vector<std::string> problems;
  std::set<std::vector<int>> paths;
  int roots = 0;
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const auto& n = tree.nodes[i];
    const std::string where = "nodes[" + std::to_string(i) + "]";
    if (n.level < 1 || n.level > kMaxDepth)
      problems.push_back(where + ": level out of range");
    if (static_cast<int>(n.path.size()) != n.level - 1)
      problems.push_back(where + ": path length must equal level - 1");
    for (int bit : n.path)
      if (bit != 0 && bit != 1) problems.push_back(where + ": path bits must be 0/1");
    if (n.prompts[0].empty() || n.prompts[1].empty())
      problems.push_back(where + ": prompts must be non-empty");
    if (!paths.insert(n.path).second)
      problems.push_back(where + ": duplicate node for this path");
    if (n.level == 1) ++roots;
  }
  if (roots != 1) problems.push_back("tree must have exactly one level-1 node");
  for (const auto& n : tree.nodes) {
    if (n.path.empty()) continue;
    std::vector<int> parent(n.path.begin(), n.path.end() - 1);
    if (!paths.contains(parent))
      problems.push_back("node at level " + std::to_string(n.level) +
                         " has no parent node");
  }
  if (!problems.empty()) throw InputError("invalid prompt tree", problems);
}

inline PromptTree parse_prompt_tree(const json& doc) {
  if (!doc.is_object() || !doc.contains("nodes") || !doc["nodes"].is_array())
    throw InputError("invalid prompt tree", {"nodes: missing or not an array"});
  PromptTree tree;
  tree.domain = doc.value("domain", std::string{});
  for (std::size_t i = 0; i < doc["nodes"].size(); ++i) {
    const auto& n = doc["nodes"][i];
    const std::string where = "nodes[" + std::to_string(i) + "]";
    if (!n.is_object() || !n.contains("level") || !n["level"].is_number_integer() ||
        !n.contains("path") || !n["path"].is_array() || !n.contains("prompts") ||
        !n["prompts"].is_array() || n["prompts"].size() != 2 ||
        !n["prompts"][0].is_string() || !n["prompts"][1].is_string())
      throw InputError("invalid prompt tree",
                       {where + ": expected {level, path, prompts[2]}"});
    PromptNode node;
    node.level = n["level"].get<int>();
    for (const auto& bit : n["path"]) {
      if (!bit.is_number_integer())
        throw InputError("invalid prompt tree", {where + ": path bits must be integers"});
      node.path.push_back(bit.get<int>());
    }
    node.prompts = {n["prompts"][0].get<std::string>(),
                    n["prompts"][1].get<std::string>()};
    tree.nodes.push_back(std::move(node));
  }
  validate_prompt_tree(tree);
  return tree;
}

inline json prompt_tree_to_json(const PromptTree& tree) {
  json nodes = json::array();
  for (const auto& n : tree.nodes)
    nodes.push_back({{"level", n.level},
                     {"path", n.path},
                     {"prompts", {n.prompts[0], n.prompts[1]}}});
  return {{"domain", tree.domain}, {"nodes", std::move(nodes)}};
}

}  // namespace hilsort
