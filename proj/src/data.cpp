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

#include "hjoint/data.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <unordered_set>

#include "hjoint/error.hpp"
#include "hjoint/random.hpp"

namespace hjoint {

using nlohmann::json;

namespace {

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

std::string variant_from_filename(const std::filesystem::path& path) {
  const std::string stem = path.stem().string();
  if (stem == "data_full") return "full";
  if (stem == "data_small") return "small";
  if (stem == "data_imbalanced") return "imbalanced";
  if (stem == "data_oos_plus") return "oos_plus";
  return "custom";
}

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

}  // namespace

// ---------------------------------------------------------------------------
// Domain map and label space

DomainMap parse_domain_map(const json& j) {
  if (!j.is_object()) throw DataError("domain map must be a JSON object");
  DomainMap map;
  std::set<std::string> seen;
  for (const auto& [domain, intents] : j.items()) {
    if (domain == kOosLabel) throw DataError("domain map must not list the oos domain");
    if (!intents.is_array()) {
      throw DataError("domain map entry \"" + domain + "\" must be a list of intents");
    }
    auto& list = map[domain];
    for (const auto& intent : intents) {
      if (!intent.is_string()) throw DataError("intent names must be strings in \"" + domain + "\"");
      std::string name = intent.get<std::string>();
      if (name == kOosLabel) throw DataError("domain map must not list the oos intent");
      if (!seen.insert(name).second) {
        throw DataError("intent \"" + name + "\" appears in more than one domain");
      }
      list.push_back(std::move(name));
    }
  }
  if (map.empty()) throw DataError("domain map is empty");
  return map;
}

DomainMap load_domain_map(const std::filesystem::path& path) {
  return parse_domain_map(read_json_file(path));
}

json domain_map_to_json(const DomainMap& map) {
  json j = json::object();
  for (const auto& [domain, intents] : map) j[domain] = intents;
  return j;
}

LabelSpace LabelSpace::from_domain_map(const DomainMap& map) {
  LabelSpace ls;
  std::vector<std::pair<std::string, std::string>> intent_to_domain;
  for (const auto& [domain, intents] : map) {
    ls.domains_.push_back(domain);
    for (const auto& intent : intents) intent_to_domain.emplace_back(intent, domain);
  }
  ls.domains_.emplace_back(kOosLabel);
  intent_to_domain.emplace_back(std::string(kOosLabel), std::string(kOosLabel));
  std::sort(ls.domains_.begin(), ls.domains_.end());
  std::sort(intent_to_domain.begin(), intent_to_domain.end());
  for (const auto& [intent, domain] : intent_to_domain) {
    ls.intents_.push_back(intent);
    ls.intent_domain_.push_back(*ls.find_domain(domain));
  }
  ls.oos_domain_ = *ls.find_domain(kOosLabel);
  ls.oos_intent_ = *ls.find_intent(kOosLabel);
  return ls;
}

std::optional<std::size_t> LabelSpace::find_domain(std::string_view name) const {
  auto it = std::lower_bound(domains_.begin(), domains_.end(), name);
  if (it == domains_.end() || *it != name) return std::nullopt;
  return static_cast<std::size_t>(it - domains_.begin());
}

std::optional<std::size_t> LabelSpace::find_intent(std::string_view name) const {
  auto it = std::lower_bound(intents_.begin(), intents_.end(), name);
  if (it == intents_.end() || *it != name) return std::nullopt;
  return static_cast<std::size_t>(it - intents_.begin());
}

DomainMap LabelSpace::domain_map() const {
  DomainMap map;
  for (std::size_t i = 0; i < intents_.size(); ++i) {
    if (i == oos_intent_) continue;
    map[domains_[intent_domain_[i]]].push_back(intents_[i]);
  }
  return map;
}

// ---------------------------------------------------------------------------
// Dataset

const std::vector<LabeledExample>& Dataset::split(Split s) const {
  switch (s) {
    case Split::kTrain: return train;
    case Split::kValid: return valid;
    case Split::kTest: return test;
  }
  return test;
}

std::vector<std::string> Dataset::all_texts() const {
  std::vector<std::string> out;
  for (const auto* s : {&train, &valid, &test}) {
    for (const auto& ex : *s) out.push_back(ex.text);
  }
  return out;
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "valid" || name == "val") return Split::kValid;
  if (name == "test") return Split::kTest;
  throw ConfigError("unknown split \"" + std::string(name) + "\" (train|valid|test)");
}

std::string_view split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kValid: return "valid";
    case Split::kTest: return "test";
  }
  return "test";
}

std::pair<Dataset, LabelSpace> load_oos_dataset(const json& data, const DomainMap& map) {
  if (!data.is_object()) throw DataError("dataset must be a JSON object");
  LabelSpace labels = LabelSpace::from_domain_map(map);
  Dataset ds;

  auto read_rows = [&](const char* key, bool oos, std::vector<LabeledExample>& out) {
    if (!data.contains(key)) throw DataError(std::string("dataset is missing key \"") + key + "\"");
    const json& rows = data.at(key);
    if (!rows.is_array()) throw DataError(std::string("dataset key \"") + key + "\" must be a list");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const json& row = rows[i];
      if (!row.is_array() || row.size() != 2 || !row[0].is_string() || !row[1].is_string()) {
        throw DataError(std::string("malformed pair at ") + key + "[" + std::to_string(i) +
                        "]: expected [utterance, intent]");
      }
      const std::string intent = oos ? std::string(kOosLabel) : row[1].get<std::string>();
      auto idx = labels.find_intent(intent);
      if (!idx) {
        throw DataError("intent \"" + intent + "\" at " + key + "[" + std::to_string(i) +
                        "] is not covered by the domain map");
      }
      out.push_back({row[0].get<std::string>(), labels.domain_of(*idx), *idx});
    }
  };

  read_rows("train", false, ds.train);
  read_rows("oos_train", true, ds.train);
  read_rows("val", false, ds.valid);
  read_rows("oos_val", true, ds.valid);
  read_rows("test", false, ds.test);
  read_rows("oos_test", true, ds.test);
  return {std::move(ds), std::move(labels)};
}

std::pair<Dataset, LabelSpace> load_oos_dataset(const std::filesystem::path& data_path,
                                                const std::filesystem::path& domain_map_path) {
  auto result = load_oos_dataset(read_json_file(data_path), load_domain_map(domain_map_path));
  result.first.variant = variant_from_filename(data_path);
  return result;
}

json to_oos_json(const Dataset& dataset, const LabelSpace& labels) {
  json out = json::object();
  auto emit = [&](const std::vector<LabeledExample>& rows, const char* in_key,
                  const char* oos_key) {
    json in = json::array(), oos = json::array();
    for (const auto& ex : rows) {
      json pair = json::array({ex.text, labels.intents().at(ex.intent)});
      (ex.intent == labels.oos_intent() ? oos : in).push_back(std::move(pair));
    }
    out[in_key] = std::move(in);
    out[oos_key] = std::move(oos);
  };
  emit(dataset.train, "train", "oos_train");
  emit(dataset.valid, "val", "oos_val");
  emit(dataset.test, "test", "oos_test");
  return out;
}

void check_consistency(const Dataset& dataset, const LabelSpace& labels) {
  for (Split s : {Split::kTrain, Split::kValid, Split::kTest}) {
    const auto& rows = dataset.split(s);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& ex = rows[i];
      const std::string where = std::string(split_name(s)) + "[" + std::to_string(i) + "]";
      if (ex.intent >= labels.num_intents() || ex.domain >= labels.num_domains()) {
        throw DataError("label outside the label space at " + where);
      }
      if (labels.domain_of(ex.intent) != ex.domain) {
        throw DataError("domain label disagrees with intent's domain at " + where);
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Count validation

CountExpectations oos_variant_expectations(std::string_view variant) {
  const SplitCounts valid{3100, 100, {20}};
  const SplitCounts test{5500, 1000, {30}};
  if (variant == "full") return {"full", {15100, 100, {100}}, valid, test};
  if (variant == "small") return {"small", {7600, 100, {50}}, valid, test};
  if (variant == "imbalanced") {
    return {"imbalanced", {10625, 100, {25, 50, 75, 100}}, valid, test};
  }
  if (variant == "oos_plus") return {"oos_plus", {15250, 250, {100}}, valid, test};
  throw ConfigError("no published counts for variant \"" + std::string(variant) + "\"");
}

CountExpectations parse_count_expectations(const json& j) {
  auto split = [&](const char* key) {
    if (!j.contains(key)) throw DataError(std::string("expectations missing \"") + key + "\"");
    const json& s = j.at(key);
    SplitCounts c;
    try {
      c.total = s.at("total").get<std::size_t>();
      c.oos = s.at("oos").get<std::size_t>();
      c.per_intent = s.at("per_intent").get<std::vector<std::size_t>>();
    } catch (const json::exception& e) {
      throw DataError(std::string("malformed expectations for \"") + key + "\": " + e.what());
    }
    return c;
  };
  CountExpectations e;
  e.variant = j.value("variant", "custom");
  e.train = split("train");
  e.valid = split("valid");
  e.test = split("test");
  return e;
}

CountReport validate_counts(const Dataset& dataset, const LabelSpace& labels,
                            const CountExpectations& expected) {
  CountReport report;
  auto check = [&](Split s, const SplitCounts& want) {
    const auto& rows = dataset.split(s);
    const std::string name(split_name(s));
    std::vector<std::size_t> per_intent(labels.num_intents(), 0);
    for (const auto& ex : rows) {
      if (ex.intent < per_intent.size()) ++per_intent[ex.intent];
    }
    if (rows.size() != want.total) {
      report.mismatches.push_back(name + ": total " + std::to_string(rows.size()) +
                                  ", expected " + std::to_string(want.total));
    }
    const std::size_t oos = per_intent[labels.oos_intent()];
    if (oos != want.oos) {
      report.mismatches.push_back(name + ": oos " + std::to_string(oos) + ", expected " +
                                  std::to_string(want.oos));
    }
    for (std::size_t i = 0; i < per_intent.size(); ++i) {
      if (i == labels.oos_intent()) continue;
      if (std::find(want.per_intent.begin(), want.per_intent.end(), per_intent[i]) ==
          want.per_intent.end()) {
        report.mismatches.push_back(name + ": intent \"" + labels.intents()[i] + "\" has " +
                                    std::to_string(per_intent[i]) + " examples");
      }
    }
  };
  check(Split::kTrain, expected.train);
  check(Split::kValid, expected.valid);
  check(Split::kTest, expected.test);
  return report;
}

// ---------------------------------------------------------------------------
// Synthetic fixture

std::pair<Dataset, LabelSpace> synth_dataset(std::uint64_t seed, std::size_t domains,
                                             std::size_t intents_per_domain,
                                             std::size_t examples_per_intent,
                                             std::size_t oos_examples,
                                             const SynthOptions& options) {
  if (domains == 0 || intents_per_domain == 0 || examples_per_intent == 0 ||
      oos_examples == 0) {
    throw ConfigError("synthetic dataset counts must all be >= 1");
  }
  if (options.filler_vocab == 0 || options.oos_keywords == 0 ||
      options.min_fillers > options.max_fillers) {
    throw ConfigError("invalid synthetic dataset options");
  }

  auto pad = [](std::size_t v, int width) {
    std::string s = std::to_string(v);
    return std::string(s.size() < static_cast<std::size_t>(width) ? width - s.size() : 0, '0') + s;
  };

  DomainMap map;
  std::vector<std::string> domain_names, intent_names;
  for (std::size_t i = 0; i < domains; ++i) {
    domain_names.push_back("dom" + pad(i, 2));
    for (std::size_t j = 0; j < intents_per_domain; ++j) {
      intent_names.push_back(domain_names.back() + "_int" + pad(j, 2));
      map[domain_names.back()].push_back(intent_names.back());
    }
  }
  LabelSpace labels = LabelSpace::from_domain_map(map);

  Rng rng(seed);
  auto fillers = [&](std::string& text) {
    const std::size_t span = options.max_fillers - options.min_fillers + 1;
    const std::size_t n = options.min_fillers + static_cast<std::size_t>(rng.below(span));
    for (std::size_t f = 0; f < n; ++f) {
      text += " f" + std::to_string(rng.below(options.filler_vocab));
    }
  };
  auto in_scope = [&](std::size_t domain, std::size_t intent_in_domain) {
    const std::size_t keyword = domain * intents_per_domain + intent_in_domain;
    std::string text = "d" + std::to_string(domain) + " w" + std::to_string(keyword);
    fillers(text);
    const std::size_t intent = *labels.find_intent(intent_names[keyword]);
    return LabeledExample{std::move(text), labels.domain_of(intent), intent};
  };
  auto out_of_scope = [&](bool novel) {
    std::string text;
    if (rng.uniform() < options.oos_domain_overlap) {
      text = "d" + std::to_string(rng.below(domains)) + " ";
    }
    const std::size_t base = novel ? options.oos_keywords : 0;
    text += "o" + std::to_string(base + rng.below(options.oos_keywords));
    fillers(text);
    return LabeledExample{std::move(text), labels.oos_domain(), labels.oos_intent()};
  };
  auto fill_split = [&](std::vector<LabeledExample>& out, std::size_t per_intent,
                        std::size_t oos, double novel_fraction) {
    for (std::size_t d = 0; d < domains; ++d) {
      for (std::size_t j = 0; j < intents_per_domain; ++j) {
        for (std::size_t e = 0; e < per_intent; ++e) out.push_back(in_scope(d, j));
      }
    }
    const auto novel = static_cast<std::size_t>(novel_fraction * static_cast<double>(oos));
    for (std::size_t e = 0; e < oos; ++e) out.push_back(out_of_scope(e < novel));
  };

  Dataset ds;
  ds.variant = "synthetic";
  fill_split(ds.train, examples_per_intent, oos_examples, 0.0);
  fill_split(ds.valid, ceil_div(examples_per_intent, 4), ceil_div(oos_examples, 2),
             options.novel_oos_fraction);
  fill_split(ds.test, ceil_div(examples_per_intent, 2), oos_examples,
             options.novel_oos_fraction);
  return {std::move(ds), std::move(labels)};
}

}  // namespace hjoint
