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

#include "hjoint/cli.hpp"

#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "hjoint/checkpoint.hpp"
#include "hjoint/data.hpp"
#include "hjoint/encoder.hpp"
#include "hjoint/error.hpp"
#include "hjoint/evaluation.hpp"

namespace hjoint::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kBuiltinLearningRate = 1e-3;
constexpr double kExternalLearningRate = 4e-5;

fs::path resolve(const fs::path& base, const fs::path& p) {
  return p.is_absolute() || base.empty() ? p : base / p;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw DataError("cannot write " + path.string());
}

int fail(std::ostream& err, int code, std::string_view kind, std::string_view message) {
  err << json{{"error", kind}, {"message", message}}.dump() << '\n';
  return code;
}

// Maps library exceptions onto the documented exit codes.
template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    return fail(err, kConfigError, "config", e.what());
  } catch (const DataError& e) {
    return fail(err, kDataError, "data", e.what());
  } catch (const LabelError& e) {
    return fail(err, kDataError, "data", e.what());
  } catch (const EmptyUtteranceError& e) {
    return fail(err, kDataError, "data", e.what());
  } catch (const DimensionError& e) {
    return fail(err, kDataError, "data", e.what());
  } catch (const NumericError& e) {
    return fail(err, kNumericError, "numeric", e.what());
  } catch (const std::exception& e) {
    return fail(err, kFailure, "internal", e.what());
  }
}

struct LoadedModel {
  JointModel model;
  std::optional<EmbeddingStore> store;
  const EmbeddingStore* store_ptr() const { return store ? &*store : nullptr; }
};

LoadedModel load_model(const fs::path& checkpoint, const std::string& embeddings) {
  LoadedModel lm{load_checkpoint(checkpoint), std::nullopt};
  if (lm.model.config().encoder_mode == EncoderMode::kExternal) {
    if (embeddings.empty()) {
      throw ConfigError("checkpoint uses external embeddings; pass --embeddings");
    }
    lm.store = load_embedding_store(embeddings);
  }
  return lm;
}

// Loads a dataset against the checkpoint's label space. An explicit domain
// map must describe the same label space.
Dataset load_for_model(const JointModel& model, const fs::path& data,
                       const std::string& domain_map) {
  if (!domain_map.empty()) {
    LabelSpace given = LabelSpace::from_domain_map(load_domain_map(domain_map));
    if (!(given == model.labels())) {
      throw DataError("label space mismatch: domain map " + domain_map + " has " +
                      std::to_string(given.num_domains()) + " domains / " +
                      std::to_string(given.num_intents()) + " intents, checkpoint has " +
                      std::to_string(model.labels().num_domains()) + " / " +
                      std::to_string(model.labels().num_intents()));
    }
  }
  std::ifstream in(data);
  if (!in) throw DataError("cannot open " + data.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError("malformed JSON in " + data.string() + ": " + e.what());
  }
  auto [dataset, labels] = load_oos_dataset(j, model.labels().domain_map());
  return dataset;
}

}  // namespace

// ---------------------------------------------------------------------------
// RunConfig

RunConfig RunConfig::from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("run config must be a JSON object");
  static const std::set<std::string> known = {
      "data",          "domain_map", "embeddings",        "checkpoint", "reports_dir",
      "mode",          "structure",  "heads",             "dim",        "buckets",
      "ngram_orders",  "learning_rate", "warmup_proportion", "max_epochs", "patience",
      "batch_size",    "weight_decay", "seed"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown config key \"" + key + "\"");
  }
  RunConfig c;
  try {
    if (!j.contains("data")) throw ConfigError("config needs \"data\"");
    if (!j.contains("domain_map")) throw ConfigError("config needs \"domain_map\"");
    c.data = resolve(base_dir, j.at("data").get<std::string>());
    c.domain_map = resolve(base_dir, j.at("domain_map").get<std::string>());
    if (j.contains("embeddings")) c.embeddings = resolve(base_dir, j.at("embeddings").get<std::string>());
    if (j.contains("checkpoint")) c.checkpoint = resolve(base_dir, j.at("checkpoint").get<std::string>());
    if (j.contains("reports_dir")) c.reports_dir = resolve(base_dir, j.at("reports_dir").get<std::string>());
    if (j.contains("mode")) c.model.encoder_mode = parse_encoder_mode(j.at("mode").get<std::string>());
    if (j.contains("structure")) c.model.structure = parse_structure(j.at("structure").get<std::string>());
    if (j.contains("heads")) c.model.heads = parse_head_mode(j.at("heads").get<std::string>());
    if (j.contains("dim")) c.model.dim = j.at("dim").get<std::size_t>();
    if (j.contains("buckets")) c.model.encoder.buckets = j.at("buckets").get<std::uint32_t>();
    if (j.contains("ngram_orders")) c.model.encoder.orders = j.at("ngram_orders").get<std::vector<int>>();
    c.train.learning_rate = c.model.encoder_mode == EncoderMode::kBuiltin ? kBuiltinLearningRate
                                                                          : kExternalLearningRate;
    if (j.contains("learning_rate")) c.train.learning_rate = j.at("learning_rate").get<double>();
    if (j.contains("warmup_proportion")) c.train.warmup_proportion = j.at("warmup_proportion").get<double>();
    if (j.contains("max_epochs")) c.train.max_epochs = j.at("max_epochs").get<int>();
    if (j.contains("patience")) c.train.patience = j.at("patience").get<int>();
    if (j.contains("batch_size")) c.train.batch_size = j.at("batch_size").get<std::size_t>();
    if (j.contains("weight_decay")) c.train.weight_decay = j.at("weight_decay").get<double>();
    if (j.contains("seed")) c.train.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  c.model.encoder.dim = c.model.dim;
  return c;
}

json RunConfig::to_json() const {
  json j = train.to_json();
  j["data"] = data.string();
  j["domain_map"] = domain_map.string();
  if (embeddings) j["embeddings"] = embeddings->string();
  j["checkpoint"] = checkpoint.string();
  if (reports_dir) j["reports_dir"] = reports_dir->string();
  j["mode"] = encoder_mode_name(model.encoder_mode);
  j["structure"] = structure_name(model.structure);
  j["heads"] = head_mode_name(model.heads);
  j["dim"] = model.dim;
  j["buckets"] = model.encoder.buckets;
  j["ngram_orders"] = model.encoder.orders;
  return j;
}

void RunConfig::validate() const {
  train.validate();
  if (model.dim == 0) throw ConfigError("dim must be positive");
  if (model.encoder_mode == EncoderMode::kBuiltin) {
    HashEncoderConfig enc = model.encoder;
    enc.dim = model.dim;
    enc.validate();
  } else if (!embeddings) {
    throw ConfigError("mode \"external\" needs \"embeddings\"");
  }
}

// ---------------------------------------------------------------------------
// Commands

namespace {

struct TrainArgs {
  std::string config;
  std::string data, domain_map, embeddings, checkpoint, reports_dir;
  std::string mode, structure, heads;
  std::optional<double> learning_rate, weight_decay, warmup;
  std::optional<int> max_epochs, patience;
  std::optional<std::size_t> batch_size, dim;
  std::optional<std::uint32_t> buckets;
  std::optional<std::uint64_t> seed;
  bool verbose = false;
};

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  RunConfig c;
  {
    json j = a.config.empty() ? json::object() : read_json(a.config);
    // Flags win over file values; they are applied to the JSON so that
    // mode-dependent defaults are resolved once.
    if (!a.data.empty()) j["data"] = fs::absolute(a.data).string();
    if (!a.domain_map.empty()) j["domain_map"] = fs::absolute(a.domain_map).string();
    if (!a.embeddings.empty()) j["embeddings"] = fs::absolute(a.embeddings).string();
    if (!a.checkpoint.empty()) j["checkpoint"] = fs::absolute(a.checkpoint).string();
    if (!a.reports_dir.empty()) j["reports_dir"] = fs::absolute(a.reports_dir).string();
    if (!a.mode.empty()) j["mode"] = a.mode;
    if (!a.structure.empty()) j["structure"] = a.structure;
    if (!a.heads.empty()) j["heads"] = a.heads;
    if (a.learning_rate) j["learning_rate"] = *a.learning_rate;
    if (a.weight_decay) j["weight_decay"] = *a.weight_decay;
    if (a.warmup) j["warmup_proportion"] = *a.warmup;
    if (a.max_epochs) j["max_epochs"] = *a.max_epochs;
    if (a.patience) j["patience"] = *a.patience;
    if (a.batch_size) j["batch_size"] = *a.batch_size;
    if (a.dim) j["dim"] = *a.dim;
    if (a.buckets) j["buckets"] = *a.buckets;
    if (a.seed) j["seed"] = *a.seed;
    const fs::path base = a.config.empty() ? fs::path() : fs::path(a.config).parent_path();
    c = RunConfig::from_json(j, base);
  }
  c.validate();

  auto [dataset, labels] = load_oos_dataset(c.data, c.domain_map);
  std::optional<EmbeddingStore> store;
  if (c.model.encoder_mode == EncoderMode::kExternal) store = load_embedding_store(*c.embeddings);

  EpochCallback log;
  if (a.verbose) {
    log = [&err](const EpochRecord& r) { err << r.to_json().dump() << '\n'; };
  }
  TrainResult result = train(dataset, labels, c.model, c.train, store ? &*store : nullptr, log);

  const fs::path reports = c.reports_dir ? *c.reports_dir : c.checkpoint.parent_path();
  if (c.checkpoint.has_parent_path()) fs::create_directories(c.checkpoint.parent_path());
  save_checkpoint(c.checkpoint, result.model);

  std::string history;
  for (const auto& r : result.history.epochs) history += r.to_json().dump() + "\n";
  write_text(reports / "history.jsonl", history);

  const EpochRecord& best = result.history.epochs.at(result.history.best_epoch - 1);
  json summary = {{"config", c.to_json()},
                  {"stop_reason", result.history.stop_reason},
                  {"epochs_run", result.history.epochs.size()},
                  {"best_epoch", result.history.best_epoch},
                  {"best_valid_intent_accuracy", best.valid_intent_accuracy},
                  {"lambda", best.lambda},
                  {"checkpoint", c.checkpoint.string()}};
  write_text(reports / "summary.json", summary.dump(2) + "\n");
  out << summary.dump() << '\n';
  return kOk;
}

struct ModelArgs {
  std::string checkpoint, data, domain_map, embeddings, split = "test";
};

int cmd_eval(const ModelArgs& a, double tau, bool domain_threshold, std::ostream& out) {
  ThresholdConfig threshold{tau, domain_threshold};
  threshold.validate();
  LoadedModel lm = load_model(a.checkpoint, a.embeddings);
  Dataset ds = load_for_model(lm.model, a.data, a.domain_map);
  const auto& rows = ds.split(parse_split(a.split));
  EvalReport report = evaluate(lm.model, rows, lm.store_ptr(), threshold);
  json j = report.to_json();
  j["tau"] = tau;
  j["split"] = a.split;
  out << j.dump() << '\n';
  return kOk;
}

json sweep_row_json(const SweepRow& row) {
  json j = row.report.to_json();
  j["tau"] = row.tau;
  return j;
}

int cmd_sweep(const ModelArgs& a, const std::string& grid_spec, const std::string& tsv_path,
              std::ostream& out) {
  const std::vector<double> grid = parse_grid(grid_spec);
  LoadedModel lm = load_model(a.checkpoint, a.embeddings);
  Dataset ds = load_for_model(lm.model, a.data, a.domain_map);
  const Split split = parse_split(a.split);

  auto valid_rows = threshold_sweep(lm.model, ds.valid, lm.store_ptr(), grid);
  const std::size_t selected = best_f1_row(valid_rows);
  auto rows = split == Split::kValid
                  ? valid_rows
                  : threshold_sweep(lm.model, ds.split(split), lm.store_ptr(), grid);

  if (!tsv_path.empty()) {
    std::ostringstream tsv;
    write_sweep_tsv(tsv, rows);
    write_text(tsv_path, tsv.str());
  } else {
    write_sweep_tsv(out, rows);
  }
  json summary = {{"selected_tau", valid_rows[selected].tau},
                  {"valid_best", sweep_row_json(valid_rows[selected])},
                  {"split", a.split},
                  {"at_selected_tau", sweep_row_json(rows[selected])},
                  {"split_best", sweep_row_json(rows[best_f1_row(rows)])}};
  out << summary.dump() << '\n';
  return kOk;
}

int cmd_classify(const ModelArgs& a, double tau, bool domain_threshold, int top_k,
                 std::istream& in, std::ostream& out) {
  ThresholdConfig threshold{tau, domain_threshold};
  threshold.validate();
  LoadedModel lm = load_model(a.checkpoint, a.embeddings);
  const LabelSpace& labels = lm.model.labels();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    json j = {{"line", line_no}, {"text", line}};
    try {
      if (line.empty()) throw EmptyUtteranceError("empty line");
      Prediction p = predict(lm.model, lm.model.featurize(line, lm.store_ptr()), threshold);
      std::vector<std::size_t> order(p.p_intent.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      const auto k = std::min<std::size_t>(static_cast<std::size_t>(top_k), order.size());
      std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                        [&](std::size_t x, std::size_t y) {
                          return p.p_intent[x] > p.p_intent[y] ||
                                 (p.p_intent[x] == p.p_intent[y] && x < y);
                        });
      json top = json::array();
      for (std::size_t i = 0; i < k; ++i) {
        top.push_back({{"intent", labels.intents()[order[i]]}, {"p", p.p_intent[order[i]]}});
      }
      j["status"] = "ok";
      j["domain"] = labels.domains()[p.domain];
      j["domain_p"] = p.p_domain[argmax(p.p_domain)];
      j["intent"] = labels.intents()[p.intent];
      j["intent_p"] = p.p_intent[argmax(p.p_intent)];
      j["oos"] = p.intent == labels.oos_intent();
      j["thresholded"] = p.thresholded;
      j["top_intents"] = std::move(top);
    } catch (const Error& e) {
      j["status"] = "error";
      j["error"] = e.what();
    }
    out << j.dump() << '\n';
    out.flush();
  }
  return kOk;
}

int cmd_export(const ModelArgs& a, const std::string& out_path, std::ostream& out) {
  LoadedModel lm = load_model(a.checkpoint, a.embeddings);
  Dataset ds = load_for_model(lm.model, a.data, a.domain_map);
  const auto& rows = ds.split(parse_split(a.split));
  std::ostringstream tsv;
  export_representations(lm.model, rows, lm.store_ptr(), tsv);
  write_text(out_path, tsv.str());
  out << json{{"rows", rows.size()}, {"dim", lm.model.dim()}, {"out", out_path}}.dump() << '\n';
  return kOk;
}

int cmd_validate(const std::string& data, const std::string& domain_map,
                 const std::string& variant, const std::string& expect,
                 const std::string& embeddings, std::ostream& out) {
  auto [ds, labels] = load_oos_dataset(data, domain_map);
  json report = {{"variant", ds.variant},
                 {"domains", labels.num_domains()},
                 {"intents", labels.num_intents()},
                 {"train", ds.train.size()},
                 {"valid", ds.valid.size()},
                 {"test", ds.test.size()}};
  bool ok = true;
  std::optional<CountExpectations> expected;
  if (!expect.empty()) {
    expected = parse_count_expectations(read_json(expect));
  } else if (!variant.empty()) {
    expected = oos_variant_expectations(variant);
  } else if (ds.variant != "custom") {
    expected = oos_variant_expectations(ds.variant);
  }
  if (expected) {
    CountReport counts = validate_counts(ds, labels, *expected);
    report["expected_variant"] = expected->variant;
    report["count_mismatches"] = counts.mismatches;
    ok = ok && counts.ok();
  }
  if (!embeddings.empty()) {
    EmbeddingStore store = load_embedding_store(embeddings);
    std::vector<std::string> texts = ds.all_texts();
    auto missing = store.missing(texts);
    report["embedding_dimension"] = store.dimension();
    report["embedding_missing"] = missing.size();
    if (!missing.empty()) {
      missing.resize(std::min<std::size_t>(missing.size(), 5));
      report["first_missing"] = missing;
    }
    ok = ok && missing.empty();
  }
  report["ok"] = ok;
  out << report.dump() << '\n';
  return ok ? kOk : kDataError;
}

int cmd_synth(std::uint64_t seed, std::size_t domains, std::size_t intents,
              std::size_t per_intent, std::size_t oos, const std::string& out_data,
              const std::string& out_map, std::ostream& out) {
  auto [ds, labels] = synth_dataset(seed, domains, intents, per_intent, oos);
  write_text(out_data, to_oos_json(ds, labels).dump() + "\n");
  write_text(out_map, domain_map_to_json(labels.domain_map()).dump(2) + "\n");
  out << json{{"train", ds.train.size()}, {"valid", ds.valid.size()},
              {"test", ds.test.size()}, {"domains", labels.num_domains()},
              {"intents", labels.num_intents()}}
             .dump()
      << '\n';
  return kOk;
}

void add_model_options(CLI::App* cmd, ModelArgs& a, bool needs_data) {
  cmd->add_option("--checkpoint,-c", a.checkpoint, "HJM1 checkpoint")->required();
  if (needs_data) {
    cmd->add_option("--data,-d", a.data, "dataset JSON")->required();
    cmd->add_option("--domain-map", a.domain_map,
                    "domain map JSON; must match the checkpoint's label space");
    cmd->add_option("--split", a.split, "train | valid | test")->capture_default_str();
  }
  cmd->add_option("--embeddings", a.embeddings, "EMB1 file for external-embedding models");
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Hierarchical joint domain/intent classifier with out-of-scope detection", "hjoint"};
  app.require_subcommand(1);

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "train a model from a run config");
  train_cmd->add_option("--config", train_args.config, "run config JSON");
  train_cmd->add_option("--data", train_args.data);
  train_cmd->add_option("--domain-map", train_args.domain_map);
  train_cmd->add_option("--embeddings", train_args.embeddings);
  train_cmd->add_option("--checkpoint", train_args.checkpoint);
  train_cmd->add_option("--reports-dir", train_args.reports_dir);
  train_cmd->add_option("--mode", train_args.mode, "builtin | external");
  train_cmd->add_option("--structure", train_args.structure);
  train_cmd->add_option("--heads", train_args.heads, "joint | intent_only");
  train_cmd->add_option("--learning-rate,--lr", train_args.learning_rate);
  train_cmd->add_option("--weight-decay", train_args.weight_decay);
  train_cmd->add_option("--warmup", train_args.warmup);
  train_cmd->add_option("--epochs", train_args.max_epochs);
  train_cmd->add_option("--patience", train_args.patience);
  train_cmd->add_option("--batch-size", train_args.batch_size);
  train_cmd->add_option("--dim", train_args.dim);
  train_cmd->add_option("--buckets", train_args.buckets);
  train_cmd->add_option("--seed", train_args.seed);
  train_cmd->add_flag("--verbose,-v", train_args.verbose, "log one JSON line per epoch");

  ModelArgs eval_args;
  double eval_tau = 0.0;
  bool eval_domain = false;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on one split");
  add_model_options(eval_cmd, eval_args, true);
  eval_cmd->add_option("--tau", eval_tau, "oos threshold")->capture_default_str();
  eval_cmd->add_flag("--domain-threshold", eval_domain, "also threshold the domain head");

  ModelArgs sweep_args;
  std::string grid = "0.1:0.9:0.1", sweep_out;
  auto* sweep_cmd = app.add_subcommand("sweep", "evaluate over a threshold grid");
  add_model_options(sweep_cmd, sweep_args, true);
  sweep_cmd->add_option("--grid", grid, "start:stop:step or comma list")->capture_default_str();
  sweep_cmd->add_option("--out,-o", sweep_out, "sweep TSV path (default: stdout)");

  ModelArgs classify_args;
  double classify_tau = 0.0;
  bool classify_domain = false;
  int top_k = 3;
  auto* classify_cmd = app.add_subcommand("classify", "classify utterances from stdin");
  add_model_options(classify_cmd, classify_args, false);
  classify_cmd->add_option("--tau", classify_tau)->capture_default_str();
  classify_cmd->add_flag("--domain-threshold", classify_domain);
  classify_cmd->add_option("--top", top_k)->capture_default_str()->check(CLI::PositiveNumber);

  ModelArgs export_args;
  std::string export_out;
  auto* export_cmd = app.add_subcommand("export", "write d and t vectors as TSV");
  add_model_options(export_cmd, export_args, true);
  export_cmd->add_option("--out,-o", export_out)->required();

  std::string v_data, v_map, v_variant, v_expect, v_emb;
  auto* validate_cmd = app.add_subcommand("validate", "check dataset counts and coverage");
  validate_cmd->add_option("--data,-d", v_data)->required();
  validate_cmd->add_option("--domain-map", v_map)->required();
  validate_cmd->add_option("--variant", v_variant, "full | small | imbalanced | oos_plus");
  validate_cmd->add_option("--expect", v_expect, "expectations JSON");
  validate_cmd->add_option("--embeddings", v_emb, "EMB1 file to check coverage against");

  std::uint64_t s_seed = 42;
  std::size_t s_domains = 3, s_intents = 3, s_per = 20, s_oos = 30;
  std::string s_data, s_map;
  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic dataset and domain map");
  synth_cmd->add_option("--seed", s_seed)->capture_default_str();
  synth_cmd->add_option("--domains", s_domains)->capture_default_str();
  synth_cmd->add_option("--intents-per-domain", s_intents)->capture_default_str();
  synth_cmd->add_option("--examples-per-intent", s_per)->capture_default_str();
  synth_cmd->add_option("--oos", s_oos)->capture_default_str();
  synth_cmd->add_option("--out-data", s_data)->required();
  synth_cmd->add_option("--out-domain-map", s_map)->required();

  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.emplace_back("hjoint");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : argv_store) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kConfigError;
  }

  return guarded(err, [&]() -> int {
    if (*train_cmd) return cmd_train(train_args, out, err);
    if (*eval_cmd) return cmd_eval(eval_args, eval_tau, eval_domain, out);
    if (*sweep_cmd) return cmd_sweep(sweep_args, grid, sweep_out, out);
    if (*classify_cmd) {
      return cmd_classify(classify_args, classify_tau, classify_domain, top_k, in, out);
    }
    if (*export_cmd) return cmd_export(export_args, export_out, out);
    if (*validate_cmd) return cmd_validate(v_data, v_map, v_variant, v_expect, v_emb, out);
    if (*synth_cmd) {
      return cmd_synth(s_seed, s_domains, s_intents, s_per, s_oos, s_data, s_map, out);
    }
    return kConfigError;
  });
}

}  // namespace hjoint::cli
