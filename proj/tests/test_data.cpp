/*
 * Copyright 2026 The hjoint Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <set>

#include "hjoint/data.hpp"
#include "hjoint/error.hpp"
#include "test_support.hpp"

namespace hjoint {
namespace {

using nlohmann::json;
using testing::oos_fixture_json;

DomainMap clinc_map() { return load_domain_map(testing::source_path("data/clinc150_domains.json")); }

json minimal_json() {
  auto pairs = [](std::initializer_list<std::pair<const char*, const char*>> rows) {
    json out = json::array();
    for (const auto& [text, intent] : rows) out.push_back(json::array({text, intent}));
    return out;
  };
  json j;
  j["train"] = pairs({{"hi there", "greet"}, {"bye now", "leave"}});
  j["oos_train"] = pairs({{"what is love", "oos"}});
  j["val"] = pairs({{"hello", "greet"}});
  j["oos_val"] = json::array();
  j["test"] = pairs({{"goodbye", "leave"}});
  j["oos_test"] = pairs({{"sing me a song", "oos"}});
  return j;
}

TEST(DomainMap, ShippedMapHas150Intents) {
  DomainMap map = clinc_map();
  EXPECT_EQ(map.size(), 10u);
  std::set<std::string> intents;
  for (const auto& [d, names] : map) {
    EXPECT_EQ(names.size(), 15u) << d;
    intents.insert(names.begin(), names.end());
  }
  EXPECT_EQ(intents.size(), 150u);
}

TEST(DomainMap, Errors) {
  EXPECT_THROW(parse_domain_map(json::array()), DataError);
  EXPECT_THROW(parse_domain_map(json::object()), DataError);
  EXPECT_THROW(parse_domain_map(json{{"a", {"x"}}, {"b", {"x"}}}), DataError);
  EXPECT_THROW(parse_domain_map(json{{"oos", {"x"}}}), DataError);
  EXPECT_THROW(parse_domain_map(json{{"a", {"oos"}}}), DataError);
  EXPECT_THROW(parse_domain_map(json{{"a", "x"}}), DataError);
}

TEST(LabelSpace, OosIsAnOrdinaryClassOnBothHeads) {
  LabelSpace labels = LabelSpace::from_domain_map({{"social", {"greet", "leave"}}});
  EXPECT_EQ(labels.num_domains(), 2u);
  EXPECT_EQ(labels.num_intents(), 3u);
  EXPECT_EQ(labels.domains()[labels.oos_domain()], "oos");
  EXPECT_EQ(labels.intents()[labels.oos_intent()], "oos");
  EXPECT_EQ(labels.domain_of(labels.oos_intent()), labels.oos_domain());
  EXPECT_EQ(labels.domain_of(*labels.find_intent("greet")), *labels.find_domain("social"));
}

TEST(LoadOosDataset, MinimalFile) {
  DomainMap map{{"social", {"greet"}}, {"travel", {"leave"}}};
  auto [ds, labels] = load_oos_dataset(minimal_json(), map);
  EXPECT_EQ(labels.num_domains(), 3u);
  EXPECT_EQ(labels.num_intents(), 3u);
  // Two in-scope domains and two in-scope intents.
  EXPECT_EQ(labels.num_domains() - 1, 2u);
  EXPECT_EQ(labels.num_intents() - 1, 2u);
  ASSERT_EQ(ds.train.size(), 3u);
  EXPECT_EQ(ds.train[2].intent, labels.oos_intent());
  EXPECT_EQ(ds.train[2].domain, labels.oos_domain());
  EXPECT_EQ(ds.train[0].text, "hi there");
  EXPECT_EQ(ds.valid.size(), 1u);
  EXPECT_EQ(ds.test.size(), 2u);
  EXPECT_NO_THROW(check_consistency(ds, labels));
}

TEST(LoadOosDataset, UnknownIntentNamesTheIntent) {
  json j = minimal_json();
  j["train"].push_back(json::array({"fly me", "book_flight"}));
  try {
    load_oos_dataset(j, DomainMap{{"social", {"greet"}}, {"travel", {"leave"}}});
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("book_flight"), std::string::npos);
  }
}

TEST(LoadOosDataset, MalformedRows) {
  DomainMap map{{"social", {"greet"}}, {"travel", {"leave"}}};
  json missing = minimal_json();
  missing.erase("oos_val");
  EXPECT_THROW(load_oos_dataset(missing, map), DataError);
  json bad = minimal_json();
  bad["train"].push_back(json::array({"just one"}));
  EXPECT_THROW(load_oos_dataset(bad, map), DataError);
  EXPECT_THROW(load_oos_dataset(json::array(), map), DataError);
}

TEST(LoadOosDataset, ReserializeRoundTrip) {
  DomainMap map = clinc_map();
  json original = oos_fixture_json(map, "small");
  auto [ds, labels] = load_oos_dataset(original, map);
  EXPECT_EQ(to_oos_json(ds, labels), original);
  auto [again, labels2] = load_oos_dataset(to_oos_json(ds, labels), map);
  EXPECT_EQ(again.train, ds.train);
  EXPECT_EQ(again.test, ds.test);
  EXPECT_EQ(labels2, labels);
}

TEST(LoadOosDataset, OrderIsStableAcrossLoads) {
  DomainMap map{{"social", {"greet"}}, {"travel", {"leave"}}};
  auto [a, la] = load_oos_dataset(minimal_json(), map);
  auto [b, lb] = load_oos_dataset(minimal_json(), map);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.valid, b.valid);
  EXPECT_EQ(a.test, b.test);
}

TEST(LoadOosDataset, VariantFromFileName) {
  testing::TempDir dir("variant");
  DomainMap map{{"social", {"greet"}}, {"travel", {"leave"}}};
  testing::write_file(dir / "map.json", domain_map_to_json(map).dump());
  const std::pair<const char*, const char*> cases[] = {{"data_full.json", "full"},
                                                       {"data_small.json", "small"},
                                                       {"data_imbalanced.json", "imbalanced"},
                                                       {"data_oos_plus.json", "oos_plus"},
                                                       {"mine.json", "custom"}};
  for (const auto& [file, variant] : cases) {
    testing::write_file(dir / file, minimal_json().dump());
    auto [ds, labels] = load_oos_dataset(dir / file, dir / "map.json");
    EXPECT_EQ(ds.variant, variant) << file;
  }
  EXPECT_THROW(load_oos_dataset(dir / "absent.json", dir / "map.json"), DataError);
}

TEST(CheckConsistency, DetectsDomainDisagreement) {
  DomainMap map{{"social", {"greet"}}, {"travel", {"leave"}}};
  auto [ds, labels] = load_oos_dataset(minimal_json(), map);
  ds.train[0].domain = *labels.find_domain("travel");
  EXPECT_THROW(check_consistency(ds, labels), DataError);
  ds.train[0].domain = 99;
  EXPECT_THROW(check_consistency(ds, labels), DataError);
}

TEST(ValidateCounts, GeneratedFixturesMatchPublishedCounts) {
  DomainMap map = clinc_map();
  for (const char* variant : {"full", "small", "imbalanced", "oos_plus"}) {
    auto [ds, labels] = load_oos_dataset(oos_fixture_json(map, variant), map);
    CountExpectations want = oos_variant_expectations(variant);
    CountReport report = validate_counts(ds, labels, want);
    EXPECT_TRUE(report.ok()) << variant << ": " << report.mismatches.front();
  }
}

TEST(ValidateCounts, PublishedFullCounts) {
  CountExpectations full = oos_variant_expectations("full");
  EXPECT_EQ(full.train.total, 15100u);
  EXPECT_EQ(full.train.oos, 100u);
  EXPECT_EQ(full.valid.total, 3100u);
  EXPECT_EQ(full.valid.oos, 100u);
  EXPECT_EQ(full.test.total, 5500u);
  EXPECT_EQ(full.test.oos, 1000u);
  EXPECT_EQ(full.test.per_intent, (std::vector<std::size_t>{30}));
  EXPECT_THROW(oos_variant_expectations("tiny"), ConfigError);
}

TEST(ValidateCounts, OffByOneGivesExactlyOneMismatch) {
  DomainMap map = clinc_map();
  auto [ds, labels] = load_oos_dataset(oos_fixture_json(map, "full"), map);
  CountExpectations want = oos_variant_expectations("full");
  want.test.total += 1;
  EXPECT_EQ(validate_counts(ds, labels, want).mismatches.size(), 1u);

  want = oos_variant_expectations("full");
  want.valid.oos -= 1;
  EXPECT_EQ(validate_counts(ds, labels, want).mismatches.size(), 1u);
}

TEST(ValidateCounts, ReportsEveryMismatch) {
  DomainMap map = clinc_map();
  auto [ds, labels] = load_oos_dataset(oos_fixture_json(map, "small"), map);
  CountReport report = validate_counts(ds, labels, oos_variant_expectations("full"));
  // train total plus all 150 intents at 50 instead of 100.
  EXPECT_EQ(report.mismatches.size(), 151u);
}

TEST(ValidateCounts, ImbalancedCountsDrawnFromFourLevels) {
  DomainMap map = clinc_map();
  auto [ds, labels] = load_oos_dataset(oos_fixture_json(map, "imbalanced"), map);
  std::vector<std::size_t> counts(labels.num_intents(), 0);
  for (const auto& ex : ds.train) ++counts[ex.intent];
  std::set<std::size_t> levels;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (i != labels.oos_intent()) levels.insert(counts[i]);
  }
  EXPECT_EQ(levels, (std::set<std::size_t>{25, 50, 75, 100}));
  EXPECT_EQ(oos_variant_expectations("imbalanced").train.per_intent,
            (std::vector<std::size_t>{25, 50, 75, 100}));
}

TEST(ValidateCounts, ExpectationsFromJson) {
  json j = {{"variant", "tiny"},
            {"train", {{"total", 3}, {"oos", 1}, {"per_intent", {1}}}},
            {"valid", {{"total", 1}, {"oos", 0}, {"per_intent", {0, 1}}}},
            {"test", {{"total", 2}, {"oos", 1}, {"per_intent", {0, 1}}}}};
  CountExpectations want = parse_count_expectations(j);
  DomainMap map{{"social", {"greet"}}, {"travel", {"leave"}}};
  auto [ds, labels] = load_oos_dataset(minimal_json(), map);
  EXPECT_TRUE(validate_counts(ds, labels, want).ok());
  j.erase("test");
  EXPECT_THROW(parse_count_expectations(j), DataError);
}

TEST(SynthDataset, SizesAndLabels) {
  auto [ds, labels] = synth_dataset(1, 3, 3, 20, 0 + 30);
  EXPECT_EQ(labels.num_intents(), 10u);
  EXPECT_EQ(labels.num_domains(), 4u);
  EXPECT_EQ(ds.train.size(), 9u * 20 + 30);
  EXPECT_EQ(ds.valid.size(), 9u * 5 + 15);
  EXPECT_EQ(ds.test.size(), 9u * 10 + 30);
  EXPECT_NO_THROW(check_consistency(ds, labels));
  std::size_t in_scope = 0;
  for (const auto& ex : ds.train) in_scope += ex.intent != labels.oos_intent();
  EXPECT_EQ(in_scope, 180u);
}

TEST(SynthDataset, Deterministic) {
  auto [a, la] = synth_dataset(5, 2, 2, 6, 4);
  auto [b, lb] = synth_dataset(5, 2, 2, 6, 4);
  auto [c, lc] = synth_dataset(6, 2, 2, 6, 4);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  EXPECT_EQ(la, lb);
  EXPECT_NE(a.train, c.train);
  EXPECT_THROW(synth_dataset(1, 0, 2, 2, 2), ConfigError);
}

TEST(SplitNames, ParseAndPrint) {
  EXPECT_EQ(parse_split("valid"), Split::kValid);
  EXPECT_EQ(split_name(Split::kTest), "test");
  EXPECT_THROW(parse_split("dev"), ConfigError);
}

}  // namespace
}  // namespace hjoint
