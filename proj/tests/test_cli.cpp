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

#include <memory>
#include <sstream>

#include "hjoint/cli.hpp"
#include "hjoint/data.hpp"
#include "hjoint/encoder.hpp"
#include "hjoint/error.hpp"
#include "hjoint/evaluation.hpp"
#include "test_support.hpp"

namespace hjoint {
namespace {

using nlohmann::json;

struct CliRun {
  int code = 0;
  std::string out, err;
};

CliRun run_cli(std::vector<std::string> args, const std::string& input = "") {
  std::istringstream in(input);
  std::ostringstream out, err;
  CliRun r;
  r.code = cli::run(args, in, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) out.push_back(line);
  return out;
}

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = std::make_unique<testing::TempDir>("cli");
    CliRun synth = run_cli({"synth", "--seed", "3", "--domains", "3", "--intents-per-domain", "3",
                         "--examples-per-intent", "20", "--oos", "30", "--out-data",
                         path("data.json"), "--out-domain-map", path("map.json")});
    ASSERT_EQ(synth.code, 0) << synth.err;
    write_config("config.json", base_config());
    CliRun trained = run_cli({"train", "--config", path("config.json")});
    ASSERT_EQ(trained.code, 0) << trained.err;
  }
  static void TearDownTestSuite() { dir_.reset(); }

  static std::string path(const std::string& name) { return (*dir_ / name).string(); }

  static json base_config() {
    return {{"data", "data.json"},   {"domain_map", "map.json"}, {"checkpoint", "model.hjm"},
            {"dim", 32},             {"buckets", 4096},          {"max_epochs", 40},
            {"patience", 40},        {"learning_rate", 0.003},   {"seed", 5}};
  }

  static void write_config(const std::string& name, const json& j) {
    testing::write_file(*dir_ / name, j.dump(2));
  }

  static std::vector<std::string> model_args(const std::string& cmd) {
    return {cmd, "--checkpoint", path("model.hjm"), "--data", path("data.json"), "--domain-map",
            path("map.json")};
  }

  static std::unique_ptr<testing::TempDir> dir_;
};

std::unique_ptr<testing::TempDir> CliTest::dir_;

TEST_F(CliTest, TrainWritesCheckpointHistoryAndSummary) {
  EXPECT_TRUE(std::filesystem::exists(path("model.hjm")));
  auto history = lines_of(testing::read_file(path("history.jsonl")));
  ASSERT_FALSE(history.empty());
  for (const auto& line : history) {
    json r = json::parse(line);
    EXPECT_GT(r["lambda"].get<double>(), 0.0);
    EXPECT_LT(r["lambda"].get<double>(), 1.0);
  }
  json summary = json::parse(testing::read_file(path("summary.json")));
  EXPECT_TRUE(summary.contains("stop_reason"));
  EXPECT_TRUE(summary.contains("config"));
}

TEST_F(CliTest, NegativeLearningRateIsConfigError) {
  CliRun r = run_cli({"train", "--config", path("config.json"), "--lr", "-0.1", "--checkpoint",
                   path("unused.hjm")});
  EXPECT_EQ(r.code, 2);
  json diag = json::parse(lines_of(r.err).back());
  EXPECT_EQ(diag["error"], "config");
  EXPECT_FALSE(std::filesystem::exists(path("unused.hjm")));
}

TEST_F(CliTest, UnknownConfigKeyIsConfigError) {
  json j = base_config();
  j["learning_rat"] = 0.1;
  write_config("typo.json", j);
  EXPECT_EQ(run_cli({"train", "--config", path("typo.json")}).code, 2);
}

TEST_F(CliTest, MissingDataFileIsDataError) {
  json j = base_config();
  j["data"] = "nowhere.json";
  write_config("nodata.json", j);
  EXPECT_EQ(run_cli({"train", "--config", path("nodata.json")}).code, 3);
}

TEST_F(CliTest, ExternalModeMissingUtteranceNamesIt) {
  auto [ds, labels] = load_oos_dataset(path("data.json"), path("map.json"));
  auto texts = ds.all_texts();
  EmbeddingStore store(8);
  Rng rng(2);
  const std::string dropped = texts.at(3);
  for (const auto& t : texts) {
    if (t == dropped) continue;
    std::vector<float> v;
    for (int i = 0; i < 8; ++i) v.push_back(static_cast<float>(rng.uniform(-1, 1)));
    store.insert(t, v);
  }
  write_embedding_store(*dir_ / "partial.emb", store);
  json j = base_config();
  j["mode"] = "external";
  j["embeddings"] = "partial.emb";
  j["dim"] = 8;
  j["checkpoint"] = "external.hjm";
  write_config("external.json", j);
  CliRun r = run_cli({"train", "--config", path("external.json")});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find(dropped), std::string::npos) << r.err;

  CliRun v = run_cli({"validate", "--data", path("data.json"), "--domain-map", path("map.json"),
                   "--embeddings", path("partial.emb")});
  EXPECT_EQ(v.code, 3);
  EXPECT_EQ(json::parse(v.out)["embedding_missing"], 1);
}

TEST_F(CliTest, EvalTauZeroEqualsNoThreshold) {
  CliRun plain = run_cli(model_args("eval"));
  CliRun zero = run_cli([] {
    auto a = model_args("eval");
    a.insert(a.end(), {"--tau", "0"});
    return a;
  }());
  ASSERT_EQ(plain.code, 0) << plain.err;
  ASSERT_EQ(zero.code, 0) << zero.err;
  EXPECT_EQ(plain.out, zero.out);

  EvalReport r = EvalReport::from_json(json::parse(plain.out));
  EXPECT_EQ(EvalReport::from_json(r.to_json()), r);
  EXPECT_EQ(r.total, r.tp + r.fp + r.fn + r.tn);
}

TEST_F(CliTest, EvalOnMismatchedLabelsIsDataError) {
  ASSERT_EQ(run_cli({"synth", "--domains", "2", "--out-data", path("other.json"),
                     "--out-domain-map", path("other_map.json")})
                .code,
            0);
  CliRun r = run_cli({"eval", "--checkpoint", path("model.hjm"), "--data", path("other.json"),
                   "--domain-map", path("other_map.json")});
  EXPECT_EQ(r.code, 3);
}

TEST_F(CliTest, EvalRejectsBadTau) {
  auto a = model_args("eval");
  a.insert(a.end(), {"--tau", "1.5"});
  EXPECT_EQ(run_cli(a).code, 2);
}

TEST_F(CliTest, SweepDefaultGridAndBestRow) {
  auto a = model_args("sweep");
  a.insert(a.end(), {"--out", path("sweep.tsv")});
  CliRun r = run_cli(a);
  ASSERT_EQ(r.code, 0) << r.err;
  auto lines = lines_of(testing::read_file(path("sweep.tsv")));
  ASSERT_EQ(lines.size(), 10u);
  // Brute-force scan of the TSV for the first maximum of F1.
  double best_f1 = -1, best_tau = -1;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::stringstream ss(lines[i]);
    double tau, acc_all, acc_in, p, rc, f1;
    ss >> tau >> acc_all >> acc_in >> p >> rc >> f1;
    if (f1 > best_f1) {
      best_f1 = f1;
      best_tau = tau;
    }
  }
  json summary = json::parse(r.out);
  EXPECT_NEAR(summary["split_best"]["tau"].get<double>(), best_tau, 1e-12);
  EXPECT_NEAR(summary["split_best"]["oos_f1"].get<double>(), best_f1, 1e-6);

  auto v = model_args("sweep");
  v.insert(v.end(), {"--split", "valid", "--out", path("sweep_valid.tsv")});
  CliRun valid = run_cli(v);
  ASSERT_EQ(valid.code, 0);
  json vs = json::parse(valid.out);
  EXPECT_EQ(vs["selected_tau"], vs["split_best"]["tau"]);
}

TEST_F(CliTest, SweepRejectsDescendingGrid) {
  auto a = model_args("sweep");
  a.insert(a.end(), {"--grid", "0.9:0.1:0.1"});
  EXPECT_EQ(run_cli(a).code, 2);
  auto b = model_args("sweep");
  b.insert(b.end(), {"--grid", "0.5,0.3"});
  EXPECT_EQ(run_cli(b).code, 2);
}

TEST_F(CliTest, ClassifyStreamsOneLinePerInput) {
  auto [ds, labels] = load_oos_dataset(path("data.json"), path("map.json"));
  std::string input;
  std::vector<const LabeledExample*> asked;
  for (std::size_t i = 0; i < ds.train.size(); i += 7) {
    input += ds.train[i].text + "\n";
    asked.push_back(&ds.train[i]);
  }
  input += "\n";
  CliRun r = run_cli({"classify", "--checkpoint", path("model.hjm")}, input);
  ASSERT_EQ(r.code, 0) << r.err;
  auto lines = lines_of(r.out);
  ASSERT_EQ(lines.size(), asked.size() + 1);
  std::size_t right = 0;
  for (std::size_t i = 0; i < asked.size(); ++i) {
    json j = json::parse(lines[i]);
    EXPECT_EQ(j["line"], i + 1);
    EXPECT_EQ(j["status"], "ok");
    right += j["intent"] == labels.intents()[asked[i]->intent];
  }
  EXPECT_GE(static_cast<double>(right) / asked.size(), 0.95);
  json last = json::parse(lines.back());
  EXPECT_EQ(last["status"], "error");
}

TEST_F(CliTest, ExportWritesOneRowPerExample) {
  auto a = model_args("export");
  a.insert(a.end(), {"--split", "valid", "-o", path("reps.tsv")});
  CliRun r = run_cli(a);
  ASSERT_EQ(r.code, 0) << r.err;
  auto [ds, labels] = load_oos_dataset(path("data.json"), path("map.json"));
  auto lines = lines_of(testing::read_file(path("reps.tsv")));
  EXPECT_EQ(lines.size(), ds.valid.size());
}

TEST_F(CliTest, ValidateChecksCounts) {
  json ok = {{"variant", "synthetic"},
             {"train", {{"total", 210}, {"oos", 30}, {"per_intent", {20}}}},
             {"valid", {{"total", 60}, {"oos", 15}, {"per_intent", {5}}}},
             {"test", {{"total", 120}, {"oos", 30}, {"per_intent", {10}}}}};
  testing::write_file(*dir_ / "expect.json", ok.dump());
  CliRun good = run_cli({"validate", "--data", path("data.json"), "--domain-map", path("map.json"),
                      "--expect", path("expect.json")});
  EXPECT_EQ(good.code, 0) << good.out;
  ok["test"]["total"] = 121;
  testing::write_file(*dir_ / "expect_bad.json", ok.dump());
  CliRun bad = run_cli({"validate", "--data", path("data.json"), "--domain-map", path("map.json"),
                     "--expect", path("expect_bad.json")});
  EXPECT_EQ(bad.code, 3);
  EXPECT_EQ(json::parse(bad.out)["count_mismatches"].size(), 1u);
}

TEST(Cli, UsageErrors) {
  EXPECT_NE(run_cli({}).code, 0);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 2);
  EXPECT_EQ(run_cli({"eval"}).code, 2);
}

TEST(Cli, RunConfigRejectsBadValues) {
  EXPECT_THROW(cli::RunConfig::from_json(json{{"data", "a"}, {"domain_map", "b"}, {"bogus", 1}}),
               ConfigError);
  EXPECT_THROW(cli::RunConfig::from_json(json{{"data", "a"}}), ConfigError);
  auto rc = cli::RunConfig::from_json(json{{"data", "a"}, {"domain_map", "b"}});
  EXPECT_EQ(rc.train.learning_rate, 1e-3);
  auto ext = cli::RunConfig::from_json(
      json{{"data", "a"}, {"domain_map", "b"}, {"mode", "external"}, {"embeddings", "e"}});
  EXPECT_EQ(ext.train.learning_rate, 4e-5);
}

}  // namespace
}  // namespace hjoint
