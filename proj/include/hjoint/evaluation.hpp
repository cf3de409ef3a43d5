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
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hjoint/data.hpp"
#include "hjoint/encoder.hpp"
#include "hjoint/model.hpp"
#include "json.hpp"

namespace hjoint {

struct ThresholdConfig {
  double tau = 0.0;
  // Also send the domain to oos when max p_domain < tau.
  bool apply_to_domain = false;

  void validate() const;
};

struct Prediction {
  std::size_t domain = 0;
  std::size_t intent = 0;
  // True when the threshold, not the argmax, produced the oos intent.
  bool thresholded = false;
  std::vector<double> p_domain;
  std::vector<double> p_intent;
};

// Index of the largest entry; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);

// Argmax labels, with the intent overridden to oos when its winning
// probability is strictly below tau.
Prediction apply_threshold(ForwardOutput probs, const LabelSpace& labels,
                           const ThresholdConfig& threshold);

Prediction predict(JointModel& model, const PooledInput& input,
                   const ThresholdConfig& threshold);

struct EvalReport {
  double accuracy_all = 0.0;
  double accuracy_in = 0.0;
  double oos_precision = 0.0;
  double oos_recall = 0.0;
  double oos_f1 = 0.0;
  // oos is the positive class.
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  std::size_t in_correct = 0, in_total = 0;
  std::size_t correct = 0, total = 0;

  nlohmann::json to_json() const;
  static EvalReport from_json(const nlohmann::json& j);
  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

// Accuracy over everything, accuracy over gold in-scope rows, and
// precision/recall/F1 with oos as the positive class. Precision is 0 when
// nothing is predicted oos; F1 is 0 when P + R = 0.
EvalReport compute_metrics(std::span<const std::size_t> preds,
                           std::span<const std::size_t> golds, std::size_t oos_label);
EvalReport compute_metrics(std::span<const std::string> preds,
                           std::span<const std::string> golds, std::string_view oos_label);

// Featurizes and scores every example once; cheap to re-threshold.
std::vector<ForwardOutput> score_examples(JointModel& model,
                                          std::span<const LabeledExample> examples,
                                          const EmbeddingStore* store);

EvalReport evaluate(JointModel& model, std::span<const LabeledExample> examples,
                    const EmbeddingStore* store, const ThresholdConfig& threshold);

struct SweepRow {
  double tau = 0.0;
  EvalReport report;
};

// Inclusive arithmetic grid start, start+step, ..., stop. Entries are
// rounded to 12 decimals so 0.1:0.9:0.1 yields exactly nine values.
std::vector<double> make_grid(double start, double stop, double step);
// Parses "start:stop:step" or a comma separated list.
std::vector<double> parse_grid(std::string_view text);

// The grid must be ascending with every tau in [0, 1].
std::vector<SweepRow> threshold_sweep(JointModel& model,
                                      std::span<const LabeledExample> examples,
                                      const EmbeddingStore* store,
                                      std::span<const double> grid);
std::vector<SweepRow> threshold_sweep(std::span<const ForwardOutput> scored,
                                      std::span<const LabeledExample> examples,
                                      const LabelSpace& labels,
                                      std::span<const double> grid);

// First row with the highest oos F1.
std::size_t best_f1_row(std::span<const SweepRow> rows);

// Columns: tau, acc_all, acc_in, P, R, F1 (header line first).
void write_sweep_tsv(std::ostream& out, std::span<const SweepRow> rows);

// One row per example: utterance, gold domain, gold intent, then the H
// entries of d and the H entries of t, tab separated, floats at 9
// significant digits. Tabs and newlines inside utterances become spaces.
void export_representations(JointModel& model, std::span<const LabeledExample> examples,
                            const EmbeddingStore* store, std::ostream& out);

}  // namespace hjoint
