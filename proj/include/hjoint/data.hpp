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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace hjoint {

inline constexpr std::string_view kOosLabel = "oos";

// Domain name -> intent names. Intent names are unique across domains.
using DomainMap = std::map<std::string, std::vector<std::string>>;

DomainMap parse_domain_map(const nlohmann::json& j);
DomainMap load_domain_map(const std::filesystem::path& path);
nlohmann::json domain_map_to_json(const DomainMap& map);

// Ordered label names for both heads. "oos" is an ordinary class in each,
// and both lists are sorted so indices never depend on file order.
class LabelSpace {
 public:
  LabelSpace() = default;
  static LabelSpace from_domain_map(const DomainMap& map);

  const std::vector<std::string>& domains() const { return domains_; }
  const std::vector<std::string>& intents() const { return intents_; }
  std::size_t num_domains() const { return domains_.size(); }
  std::size_t num_intents() const { return intents_.size(); }

  std::size_t domain_of(std::size_t intent) const { return intent_domain_.at(intent); }
  std::optional<std::size_t> find_domain(std::string_view name) const;
  std::optional<std::size_t> find_intent(std::string_view name) const;
  std::size_t oos_domain() const { return oos_domain_; }
  std::size_t oos_intent() const { return oos_intent_; }

  DomainMap domain_map() const;

  friend bool operator==(const LabelSpace&, const LabelSpace&) = default;

 private:
  std::vector<std::string> domains_;
  std::vector<std::string> intents_;
  std::vector<std::size_t> intent_domain_;
  std::size_t oos_domain_ = 0;
  std::size_t oos_intent_ = 0;
};

struct LabeledExample {
  std::string text;
  std::size_t domain = 0;
  std::size_t intent = 0;

  friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

enum class Split { kTrain, kValid, kTest };

struct Dataset {
  std::vector<LabeledExample> train;
  std::vector<LabeledExample> valid;
  std::vector<LabeledExample> test;
  std::string variant = "custom";  // full | small | imbalanced | oos_plus | synthetic | custom

  const std::vector<LabeledExample>& split(Split s) const;
  std::vector<std::string> all_texts() const;
};

Split parse_split(std::string_view name);
std::string_view split_name(Split s);

// Reads the public OOS JSON layout (train/val/test plus oos_train/oos_val/
// oos_test, each a list of [utterance, intent] pairs). oos_* rows are
// appended after the in-scope rows of the matching split.
std::pair<Dataset, LabelSpace> load_oos_dataset(const nlohmann::json& data,
                                                const DomainMap& map);
std::pair<Dataset, LabelSpace> load_oos_dataset(const std::filesystem::path& data_path,
                                                const std::filesystem::path& domain_map_path);

// Inverse of load_oos_dataset: in-scope and oos rows go back to their keys.
nlohmann::json to_oos_json(const Dataset& dataset, const LabelSpace& labels);

// Throws DataError when a label index falls outside the label space or an
// example's domain disagrees with its intent's mapped domain.
void check_consistency(const Dataset& dataset, const LabelSpace& labels);

// ---------------------------------------------------------------------------
// Count validation

struct SplitCounts {
  std::size_t total = 0;
  std::size_t oos = 0;
  // Every in-scope intent must have a count from this set.
  std::vector<std::size_t> per_intent;
};

struct CountExpectations {
  std::string variant;
  SplitCounts train, valid, test;
};

// Published split sizes for the four OOS dataset variants.
CountExpectations oos_variant_expectations(std::string_view variant);
CountExpectations parse_count_expectations(const nlohmann::json& j);

struct CountReport {
  std::vector<std::string> mismatches;
  bool ok() const { return mismatches.empty(); }
};

CountReport validate_counts(const Dataset& dataset, const LabelSpace& labels,
                            const CountExpectations& expected);

// ---------------------------------------------------------------------------
// Synthetic fixture

// Knobs beyond the counts. Defaults give a separable training set whose
// held-out oos rows borrow in-scope domain keywords.
struct SynthOptions {
  std::size_t filler_vocab = 40;
  std::size_t min_fillers = 1;
  std::size_t max_fillers = 4;
  std::size_t oos_keywords = 12;
  // Probability that an oos utterance also carries an in-scope domain keyword.
  double oos_domain_overlap = 0.5;
  // Fraction of held-out oos rows that use keywords never seen in training.
  double novel_oos_fraction = 0.5;
};

// Utterances look like "d<i> w<i*K+j> <fillers>": a keyword shared by the
// domain and one unique to the intent. Splits: train has
// `examples_per_intent` per intent and `oos_examples` oos rows; valid has
// ceil(n/4) per intent and ceil(oos/2) oos; test has ceil(n/2) per intent
// and `oos_examples` oos rows. Deterministic in `seed`.
std::pair<Dataset, LabelSpace> synth_dataset(std::uint64_t seed, std::size_t domains,
                                             std::size_t intents_per_domain,
                                             std::size_t examples_per_intent,
                                             std::size_t oos_examples,
                                             const SynthOptions& options = {});

}  // namespace hjoint
