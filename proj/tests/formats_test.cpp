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

#include "hilsort/formats.hpp"

#include <gtest/gtest.h>

#include <string>

#include "hilsort/preorder.hpp"

namespace hilsort {
namespace {

bool details_contain(const InputError& e, const std::string& needle) {
  for (const auto& d : e.details())
    if (d.find(needle) != std::string::npos) return true;
  return false;
}

TEST(ItemsJsonl, ParsesAndRoundTrips) {
  const std::string text =
      R"({"id": "a", "display_ref": "img/a.png", "ground_truth": 3})" "\n"
      "\n"
      R"({"id": "b", "display_ref": "https://x/b.jpg", "ground_truth": null})" "\n"
      R"({"id": "c"})";
  const auto items = parse_items_jsonl(text);
  ASSERT_EQ(items.size(), 3u);
  EXPECT_EQ(items[0].display_ref, "img/a.png");
  EXPECT_EQ(*items[0].ground_truth, 3.0);
  EXPECT_FALSE(items[1].ground_truth);
  EXPECT_EQ(items[2].display_ref, "");
  const auto again = parse_items_jsonl(items_to_jsonl(items));
  ASSERT_EQ(again.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(again[i].id, items[i].id);
    EXPECT_EQ(again[i].display_ref, items[i].display_ref);
    EXPECT_EQ(again[i].ground_truth, items[i].ground_truth);
  }
}

TEST(ItemsJsonl, ReportsEveryBadLine) {
  const std::string text =
      "{\"id\": \"a\"}\n"
      "not json\n"
      "{\"id\": 5}\n"
      "{\"id\": \"a\"}\n"
      "{\"id\": \"d\", \"ground_truth\": \"high\"}\n";
  try {
    parse_items_jsonl(text);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_EQ(e.details().size(), 4u);
    EXPECT_TRUE(details_contain(e, "line 2"));
    EXPECT_TRUE(details_contain(e, "line 3"));
    EXPECT_TRUE(details_contain(e, "duplicate item id 'a'"));
    EXPECT_TRUE(details_contain(e, "line 5"));
  }
}

TEST(ItemsJsonl, EmptyIsEmpty) {
  EXPECT_TRUE(parse_items_jsonl("").empty());
  EXPECT_TRUE(parse_items_jsonl("\n  \n").empty());
}

TEST(Similarities, ParsesAndRoundTrips) {
  const std::string text = R"({"tau": 0.05, "items": {
      "a": {"levels": [[0.3, 0.2], [0.1, 0.4]]},
      "b": {"levels": [[-0.5, 1.0]]}}})";
  const auto t = parse_similarities(text);
  EXPECT_DOUBLE_EQ(t.tau, 0.05);
  ASSERT_EQ(t.items.at("a").size(), 2u);
  EXPECT_DOUBLE_EQ(t.items.at("a")[1][1], 0.4);
  const auto again = parse_similarities(similarities_to_json(t));
  EXPECT_EQ(again.items, t.items);
  EXPECT_DOUBLE_EQ(again.tau, t.tau);
}

TEST(Similarities, DefaultTau) {
  const auto t = parse_similarities(R"({"items": {"a": {"levels": [[0.1, 0.2]]}}})");
  EXPECT_DOUBLE_EQ(t.tau, kDefaultTemperature);
}

TEST(Similarities, FieldLevelErrors) {
  const std::string text = R"({"tau": -1, "items": {
      "a": {"levels": []},
      "b": {"levels": [[0.1]]},
      "c": {"levels": [[0.1, 2.0]]},
      "d": [[0.1, 0.2]]}})";
  try {
    parse_similarities(text);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_TRUE(details_contain(e, "tau"));
    EXPECT_TRUE(details_contain(e, "items.a"));
    EXPECT_TRUE(details_contain(e, "items.b.levels[0]"));
    EXPECT_TRUE(details_contain(e, "items.c.levels[0]"));
    EXPECT_TRUE(details_contain(e, "items.d"));
  }
  EXPECT_THROW(parse_similarities("{"), InputError);
  EXPECT_THROW(parse_similarities("[]"), InputError);
  EXPECT_THROW(parse_similarities(R"({"tau": 0.1})"), InputError);
}

TEST(Similarities, TooDeep) {
  json doc{{"items", {{"a", {{"levels", json::array()}}}}}};
  for (int i = 0; i < 17; ++i) doc["items"]["a"]["levels"].push_back({0.1, 0.2});
  EXPECT_THROW(parse_similarities(doc), InputError);
}

TEST(CrossReferences, ListsBothDirections) {
  std::vector<ItemRecord> items{{"a", "", {}}, {"b", "", {}}};
  SimilarityTable sims;
  sims.items["a"] = {{0.1, 0.2}};
  sims.items["z"] = {{0.1, 0.2}};
  try {
    check_cross_references(items, sims);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_TRUE(details_contain(e, "'b'"));
    EXPECT_TRUE(details_contain(e, "'z'"));
  }
  sims.items.erase("z");
  sims.items["b"] = {{0.1, 0.2}};
  EXPECT_NO_THROW(check_cross_references(items, sims));
}

const char* kTree = R"({"domain": "age", "nodes": [
    {"level": 1, "path": [], "prompts": ["young", "old"]},
    {"level": 2, "path": [0], "prompts": ["child", "adult"]},
    {"level": 2, "path": [1], "prompts": ["middle aged", "elderly"]},
    {"level": 3, "path": [0, 1], "prompts": ["twenties", "thirties"]}]})";

TEST(PromptTree, ParsesAndRoundTrips) {
  const auto tree = parse_prompt_tree(json::parse(kTree));
  EXPECT_EQ(tree.domain, "age");
  ASSERT_EQ(tree.nodes.size(), 4u);
  EXPECT_EQ(tree.nodes[3].path, (std::vector<int>{0, 1}));
  EXPECT_EQ(tree.nodes[2].prompts[1], "elderly");
  EXPECT_EQ(prompt_tree_to_json(parse_prompt_tree(prompt_tree_to_json(tree))),
            prompt_tree_to_json(tree));
}

TEST(PromptTree, Invalid) {
  auto doc = json::parse(kTree);
  auto bad = doc;
  bad["nodes"][3]["path"] = {1, 1, 0};
  EXPECT_THROW(parse_prompt_tree(bad), InputError);
  bad = doc;
  bad["nodes"][1]["prompts"][0] = "";
  EXPECT_THROW(parse_prompt_tree(bad), InputError);
  bad = doc;
  bad["nodes"].push_back(doc["nodes"][1]);
  EXPECT_THROW(parse_prompt_tree(bad), InputError);
  bad = doc;
  bad["nodes"].erase(0);
  EXPECT_THROW(parse_prompt_tree(bad), InputError);
  bad = doc;
  bad["nodes"][3]["path"] = {1, 1};
  bad["nodes"][2]["path"] = {0};
  EXPECT_THROW(parse_prompt_tree(bad), InputError);
  bad = doc;
  bad["nodes"][0]["prompts"] = {"only one"};
  EXPECT_THROW(parse_prompt_tree(bad), InputError);
  EXPECT_THROW(parse_prompt_tree(json::array()), InputError);
}

TEST(PromptTree, FixtureIsValid) {
  const auto tree = parse_prompt_tree(json::parse(R"({"domain": "q", "nodes": [
      {"level": 1, "path": [], "prompts": ["a", "b"]}]})"));
  EXPECT_EQ(tree.nodes.size(), 1u);
}

}  // namespace
}  // namespace hilsort
