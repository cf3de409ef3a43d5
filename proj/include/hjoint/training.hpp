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
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hjoint/data.hpp"
#include "hjoint/encoder.hpp"
#include "hjoint/graph.hpp"
#include "hjoint/model.hpp"
#include "json.hpp"

namespace hjoint {

struct TrainConfig {
  double learning_rate = 1e-3;
  double warmup_proportion = 0.1;
  int max_epochs = 10;
  int patience = 3;
  std::size_t batch_size = 32;
  double weight_decay = 0.01;
  std::uint64_t seed = 42;

  void validate() const;
  nlohmann::json to_json() const;
};

// sigmoid(raw): the mixing weight always lies in (0, 1).
double lambda_value(double lambda_raw);

// L = lambda * L_d + (1 - lambda) * L_t with lambda = sigmoid(lambda_raw).
// Intent-only models (no domain logits) return L_t alone.
Var joint_loss(Graph& g, const ForwardNodes& out, std::size_t domain_target,
               std::size_t intent_target, Var lambda_raw);

// Per-example joint loss for `model`, built on graph `g`.
Var example_loss(Graph& g, JointModel& model, const PooledInput& input,
                 std::size_t domain_target, std::size_t intent_target);

// ---------------------------------------------------------------------------
// Optimizer

struct AdamWHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// One decoupled AdamW update of `param` in place. `step` counts from 1.
void adamw_step(std::span<double> param, std::span<const double> grad,
                std::span<double> m, std::span<double> v, std::int64_t step, double lr,
                double weight_decay, const AdamWHyper& hyper = {});

// AdamW over a model's parameters. Parameters flagged no-decay skip weight
// decay. Row-sparse parameters update only the rows that received gradient
// this step (lazy moments, shared step counter).
class AdamW {
 public:
  AdamW(std::vector<Parameter*> params, double weight_decay, AdamWHyper hyper = {});

  // Applies one update using the accumulated gradients, then zeroes them.
  // Throws NumericError naming the parameter on a non-finite gradient.
  void step(double lr);
  std::int64_t steps() const { return step_; }

 private:
  struct Moments {
    std::vector<double> m, v;
    std::map<std::size_t, std::pair<std::vector<double>, std::vector<double>>> rows;
  };

  std::vector<Parameter*> params_;
  std::vector<Moments> moments_;
  double weight_decay_;
  AdamWHyper hyper_;
  std::int64_t step_ = 0;
};

// Linear warmup from 0 to base_lr over ceil(warmup * total) steps, then
// linear decay to 0 at total_steps. `step` is 1-based.
double lr_schedule(std::int64_t step, std::int64_t total_steps, double base_lr,
                   double warmup_proportion);

// Stops once the monitored metric has not strictly improved for `patience`
// consecutive epochs.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience) : patience_(patience) {}

  // Returns true when `metric` is a new best.
  bool update(double metric);
  bool should_stop() const { return epochs_ > 0 && since_best_ >= patience_; }
  int best_epoch() const { return best_epoch_; }
  double best() const { return best_; }

 private:
  int patience_;
  int epochs_ = 0;
  int since_best_ = 0;
  int best_epoch_ = 0;
  double best_ = 0.0;
};

// ---------------------------------------------------------------------------
// Training loop

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double lambda = 0.5;
  double valid_intent_accuracy = 0.0;
  double valid_domain_accuracy = 0.0;

  nlohmann::json to_json() const;
  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::string stop_reason;  // "patience" or "max_epochs"
  int best_epoch = 0;

  friend bool operator==(const TrainHistory&, const TrainHistory&) = default;
};

struct TrainResult {
  JointModel model;  // best-validation snapshot, rounded to single precision
  TrainHistory history;
};

// Called after every epoch; useful for progress logging.
using EpochCallback = std::function<void(const EpochRecord&)>;

// Seeded, single-threaded and therefore bitwise reproducible. Early stopping
// monitors validation intent accuracy without any threshold.
TrainResult train(const Dataset& dataset, const LabelSpace& labels,
                  const ModelConfig& model_config, const TrainConfig& config,
                  const EmbeddingStore* store = nullptr,
                  const EpochCallback& on_epoch = {});

}  // namespace hjoint
