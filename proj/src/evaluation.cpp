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

#include "hjoint/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "hjoint/error.hpp"

namespace hjoint {

using nlohmann::json;

void ThresholdConfig::validate() const {
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw ConfigError("threshold tau must lie in [0, 1], got " + std::to_string(tau));
  }
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw EmptySequenceError("argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

Prediction apply_threshold(ForwardOutput probs, const LabelSpace& labels,
                           const ThresholdConfig& threshold) {
  Prediction p;
  p.intent = argmax(probs.p_intent);
  p.domain = argmax(probs.p_domain);
  if (probs.p_intent[p.intent] < threshold.tau && p.intent != labels.oos_intent()) {
    p.intent = labels.oos_intent();
    p.thresholded = true;
  }
  if (threshold.apply_to_domain && probs.p_domain[p.domain] < threshold.tau) {
    p.domain = labels.oos_domain();
  }
  p.p_domain = std::move(probs.p_domain);
  p.p_intent = std::move(probs.p_intent);
  return p;
}

Prediction predict(JointModel& model, const PooledInput& input,
                   const ThresholdConfig& threshold) {
  return apply_threshold(model.predict_proba(input), model.labels(), threshold);
}

// ---------------------------------------------------------------------------
// Metrics

json EvalReport::to_json() const {
  return {{"accuracy_all", accuracy_all}, {"accuracy_in", accuracy_in},
          {"oos_precision", oos_precision}, {"oos_recall", oos_recall},
          {"oos_f1", oos_f1},
          {"counts", {{"tp", tp}, {"fp", fp}, {"fn", fn}, {"tn", tn},
                      {"in_correct", in_correct}, {"in_total", in_total},
                      {"correct", correct}, {"total", total}}}};
}

EvalReport EvalReport::from_json(const json& j) {
  EvalReport r;
  r.accuracy_all = j.at("accuracy_all").get<double>();
  r.accuracy_in = j.at("accuracy_in").get<double>();
  r.oos_precision = j.at("oos_precision").get<double>();
  r.oos_recall = j.at("oos_recall").get<double>();
  r.oos_f1 = j.at("oos_f1").get<double>();
  const json& c = j.at("counts");
  r.tp = c.at("tp").get<std::size_t>();
  r.fp = c.at("fp").get<std::size_t>();
  r.fn = c.at("fn").get<std::size_t>();
  r.tn = c.at("tn").get<std::size_t>();
  r.in_correct = c.at("in_correct").get<std::size_t>();
  r.in_total = c.at("in_total").get<std::size_t>();
  r.correct = c.at("correct").get<std::size_t>();
  r.total = c.at("total").get<std::size_t>();
  return r;
}

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

template <typename T, typename U>
EvalReport metrics_impl(std::span<const T> preds, std::span<const T> golds, const U& oos) {
  if (preds.size() != golds.size()) {
    throw DimensionError("compute_metrics: " + std::to_string(preds.size()) +
                         " predictions for " + std::to_string(golds.size()) + " gold labels");
  }
  EvalReport r;
  r.total = preds.size();
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const bool gold_oos = golds[i] == oos;
    const bool pred_oos = preds[i] == oos;
    const bool hit = preds[i] == golds[i];
    if (hit) ++r.correct;
    if (!gold_oos) {
      ++r.in_total;
      if (hit) ++r.in_correct;
    }
    if (gold_oos && pred_oos) ++r.tp;
    else if (!gold_oos && pred_oos) ++r.fp;
    else if (gold_oos && !pred_oos) ++r.fn;
    else ++r.tn;
  }
  r.accuracy_all = ratio(r.correct, r.total);
  r.accuracy_in = ratio(r.in_correct, r.in_total);
  r.oos_precision = ratio(r.tp, r.tp + r.fp);
  r.oos_recall = ratio(r.tp, r.tp + r.fn);
  // 2PR/(P+R) in count form: one exact-input division.
  r.oos_f1 = r.tp > 0 ? ratio(2 * r.tp, 2 * r.tp + r.fp + r.fn) : 0.0;
  return r;
}

}  // namespace

EvalReport compute_metrics(std::span<const std::size_t> preds,
                           std::span<const std::size_t> golds, std::size_t oos_label) {
  return metrics_impl(preds, golds, oos_label);
}

EvalReport compute_metrics(std::span<const std::string> preds,
                           std::span<const std::string> golds, std::string_view oos_label) {
  return metrics_impl(preds, golds, oos_label);
}

std::vector<ForwardOutput> score_examples(JointModel& model,
                                          std::span<const LabeledExample> examples,
                                          const EmbeddingStore* store) {
  std::vector<ForwardOutput> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) out.push_back(model.predict_proba(model.featurize(ex.text, store)));
  return out;
}

EvalReport evaluate(JointModel& model, std::span<const LabeledExample> examples,
                    const EmbeddingStore* store, const ThresholdConfig& threshold) {
  const double grid[] = {threshold.tau};
  threshold.validate();
  auto scored = score_examples(model, examples, store);
  return threshold_sweep(scored, examples, model.labels(), grid).front().report;
}

// ---------------------------------------------------------------------------
// Sweeps

std::vector<double> make_grid(double start, double stop, double step) {
  if (!(step > 0.0) || !(stop >= start)) {
    throw ConfigError("grid needs step > 0 and stop >= start");
  }
  std::vector<double> out;
  for (std::size_t i = 0;; ++i) {
    double v = std::round((start + static_cast<double>(i) * step) * 1e12) / 1e12;
    if (v > stop + 1e-12) break;
    out.push_back(v);
  }
  return out;
}

std::vector<double> parse_grid(std::string_view text) {
  auto number = [&](std::string_view s) {
    double v = 0.0;
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw ConfigError("malformed grid value \"" + std::string(s) + "\"");
    }
    return v;
  };
  std::vector<double> out;
  if (text.find(':') != std::string_view::npos) {
    std::vector<double> parts;
    std::size_t pos = 0;
    while (true) {
      std::size_t next = text.find(':', pos);
      parts.push_back(number(text.substr(pos, next - pos)));
      if (next == std::string_view::npos) break;
      pos = next + 1;
    }
    if (parts.size() != 3) throw ConfigError("grid must be start:stop:step");
    if (parts[1] < parts[0]) throw ConfigError("grid must be ascending");
    out = make_grid(parts[0], parts[1], parts[2]);
  } else {
    std::size_t pos = 0;
    while (true) {
      std::size_t next = text.find(',', pos);
      out.push_back(number(text.substr(pos, next - pos)));
      if (next == std::string_view::npos) break;
      pos = next + 1;
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(out[i] >= 0.0 && out[i] <= 1.0)) throw ConfigError("grid values must lie in [0, 1]");
    if (i > 0 && !(out[i] > out[i - 1])) throw ConfigError("grid must be strictly ascending");
  }
  if (out.empty()) throw ConfigError("grid is empty");
  return out;
}

std::vector<SweepRow> threshold_sweep(std::span<const ForwardOutput> scored,
                                      std::span<const LabeledExample> examples,
                                      const LabelSpace& labels,
                                      std::span<const double> grid) {
  if (scored.size() != examples.size()) {
    throw DimensionError("threshold_sweep: scores and examples differ in length");
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    ThresholdConfig{grid[i], false}.validate();
    if (i > 0 && grid[i] < grid[i - 1]) throw ConfigError("threshold grid must be ascending");
  }
  std::vector<std::size_t> golds;
  golds.reserve(examples.size());
  for (const auto& ex : examples) golds.push_back(ex.intent);

  std::vector<SweepRow> rows;
  std::vector<std::size_t> preds(examples.size());
  for (double tau : grid) {
    const ThresholdConfig threshold{tau, false};
    for (std::size_t i = 0; i < scored.size(); ++i) {
      preds[i] = apply_threshold(scored[i], labels, threshold).intent;
    }
    rows.push_back({tau, compute_metrics(std::span<const std::size_t>(preds),
                                         std::span<const std::size_t>(golds),
                                         labels.oos_intent())});
  }
  return rows;
}

std::vector<SweepRow> threshold_sweep(JointModel& model,
                                      std::span<const LabeledExample> examples,
                                      const EmbeddingStore* store,
                                      std::span<const double> grid) {
  auto scored = score_examples(model, examples, store);
  return threshold_sweep(scored, examples, model.labels(), grid);
}

std::size_t best_f1_row(std::span<const SweepRow> rows) {
  if (rows.empty()) throw EmptySequenceError("best_f1_row: no sweep rows");
  std::size_t best = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].report.oos_f1 > rows[best].report.oos_f1) best = i;
  }
  return best;
}

void write_sweep_tsv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "tau\tacc_all\tacc_in\tP\tR\tF1\n";
  char buf[256];
  for (const auto& row : rows) {
    const EvalReport& r = row.report;
    std::snprintf(buf, sizeof buf, "%.6g\t%.17g\t%.17g\t%.17g\t%.17g\t%.17g\n", row.tau,
                  r.accuracy_all, r.accuracy_in, r.oos_precision, r.oos_recall, r.oos_f1);
    out << buf;
  }
}

void export_representations(JointModel& model, std::span<const LabeledExample> examples,
                            const EmbeddingStore* store, std::ostream& out) {
  const LabelSpace& labels = model.labels();
  char buf[32];
  for (const auto& ex : examples) {
    ForwardOutput f = model.predict_proba(model.featurize(ex.text, store));
    std::string text = ex.text;
    std::replace_if(text.begin(), text.end(),
                    [](char c) { return c == '\t' || c == '\n' || c == '\r'; }, ' ');
    out << text << '\t' << labels.domains().at(ex.domain) << '\t'
        << labels.intents().at(ex.intent);
    for (const auto* vec : {&f.d, &f.t}) {
      for (double v : *vec) {
        std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(static_cast<float>(v)));
        out << '\t' << buf;
      }
    }
    out << '\n';
  }
  if (!out) throw DataError("failed writing representation export");
}

}  // namespace hjoint
