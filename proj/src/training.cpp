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

#include "hjoint/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hjoint/error.hpp"
#include "hjoint/evaluation.hpp"
#include "hjoint/random.hpp"

namespace hjoint {

using nlohmann::json;

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be positive");
  }
  if (!(warmup_proportion >= 0.0 && warmup_proportion < 1.0)) {
    throw ConfigError("warmup_proportion must lie in [0, 1)");
  }
  if (max_epochs < 1) throw ConfigError("max_epochs must be positive");
  if (patience < 0) throw ConfigError("patience must be >= 0");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
}

json TrainConfig::to_json() const {
  return {{"learning_rate", learning_rate}, {"warmup_proportion", warmup_proportion},
          {"max_epochs", max_epochs},       {"patience", patience},
          {"batch_size", batch_size},       {"weight_decay", weight_decay},
          {"seed", seed}};
}

double lambda_value(double lambda_raw) {
  return lambda_raw >= 0.0 ? 1.0 / (1.0 + std::exp(-lambda_raw))
                           : std::exp(lambda_raw) / (1.0 + std::exp(lambda_raw));
}

Var joint_loss(Graph& g, const ForwardNodes& out, std::size_t domain_target,
               std::size_t intent_target, Var lambda_raw) {
  Var intent_loss = g.softmax_xent(out.intent_logits, intent_target);
  if (!out.domain_logits) return intent_loss;
  Var domain_loss = g.softmax_xent(*out.domain_logits, domain_target);
  Var lambda = g.sigmoid(lambda_raw);
  return g.add(g.mul(lambda, domain_loss), g.mul(g.one_minus(lambda), intent_loss));
}

Var example_loss(Graph& g, JointModel& model, const PooledInput& input,
                 std::size_t domain_target, std::size_t intent_target) {
  ForwardNodes out = model.forward(g, model.pooled(g, input));
  return joint_loss(g, out, domain_target, intent_target, g.param(model.lambda_raw()));
}

// ---------------------------------------------------------------------------
// Optimizer

void adamw_step(std::span<double> param, std::span<const double> grad, std::span<double> m,
                std::span<double> v, std::int64_t step, double lr, double weight_decay,
                const AdamWHyper& hyper) {
  if (grad.size() != param.size() || m.size() != param.size() || v.size() != param.size()) {
    throw DimensionError("adamw_step: parameter, gradient and moment sizes differ");
  }
  if (step < 1) throw ConfigError("adamw_step: step counts from 1");
  const double c1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(step));
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    if (!std::isfinite(g)) {
      throw NumericError("adamw_step: non-finite gradient at entry " + std::to_string(i));
    }
    m[i] = hyper.beta1 * m[i] + (1.0 - hyper.beta1) * g;
    v[i] = hyper.beta2 * v[i] + (1.0 - hyper.beta2) * g * g;
    const double m_hat = m[i] / c1;
    const double v_hat = v[i] / c2;
    param[i] -= lr * (m_hat / (std::sqrt(v_hat) + hyper.eps) + weight_decay * param[i]);
  }
}

AdamW::AdamW(std::vector<Parameter*> params, double weight_decay, AdamWHyper hyper)
    : params_(std::move(params)), weight_decay_(weight_decay), hyper_(hyper) {
  for (Parameter* p : params_) {
    Moments mo;
    if (!p->row_sparse()) {
      mo.m.assign(p->value().size(), 0.0);
      mo.v.assign(p->value().size(), 0.0);
    }
    moments_.push_back(std::move(mo));
  }
}

void AdamW::step(double lr) {
  ++step_;
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Parameter& p = *params_[k];
    Moments& mo = moments_[k];
    const double wd = p.decays() ? weight_decay_ : 0.0;
    try {
      if (!p.row_sparse()) {
        adamw_step(p.value().values(), p.dense_grad().values(), mo.m, mo.v, step_, lr, wd,
                   hyper_);
      } else {
        const std::size_t cols = p.value().cols();
        for (const auto& [row, grad] : p.row_grads()) {
          auto [it, _] = mo.rows.try_emplace(row, std::vector<double>(cols, 0.0),
                                             std::vector<double>(cols, 0.0));
          adamw_step(p.value().row(row), grad, it->second.first, it->second.second, step_,
                     lr, wd, hyper_);
        }
      }
    } catch (const NumericError& e) {
      throw NumericError(std::string(e.what()) + " of parameter " + p.name() + " at step " +
                         std::to_string(step_));
    }
    p.zero_grad();
  }
}

double lr_schedule(std::int64_t step, std::int64_t total_steps, double base_lr,
                   double warmup_proportion) {
  if (total_steps <= 0) throw ConfigError("lr_schedule: total_steps must be positive");
  if (step < 1 || step > total_steps) {
    throw ConfigError("lr_schedule: step " + std::to_string(step) + " outside [1, " +
                      std::to_string(total_steps) + "]");
  }
  // The epsilon keeps 0.1 * 30 from rounding up to 4.
  const auto warmup = static_cast<std::int64_t>(
      std::ceil(warmup_proportion * static_cast<double>(total_steps) - 1e-9));
  if (step <= warmup) {
    return base_lr * static_cast<double>(step) / static_cast<double>(warmup);
  }
  return base_lr * static_cast<double>(total_steps - step) /
         static_cast<double>(total_steps - warmup);
}

bool EarlyStopping::update(double metric) {
  ++epochs_;
  if (epochs_ == 1 || metric > best_) {
    best_ = metric;
    best_epoch_ = epochs_;
    since_best_ = 0;
    return true;
  }
  ++since_best_;
  return false;
}

// ---------------------------------------------------------------------------
// Training loop

json EpochRecord::to_json() const {
  return {{"epoch", epoch},
          {"train_loss", train_loss},
          {"lambda", lambda},
          {"valid_intent_accuracy", valid_intent_accuracy},
          {"valid_domain_accuracy", valid_domain_accuracy}};
}

namespace {

struct Featurized {
  PooledInput input;
  std::size_t domain;
  std::size_t intent;
};

std::vector<Featurized> featurize_split(const JointModel& model,
                                        const std::vector<LabeledExample>& rows,
                                        const EmbeddingStore* store) {
  std::vector<Featurized> out;
  out.reserve(rows.size());
  for (const auto& ex : rows) out.push_back({model.featurize(ex.text, store), ex.domain, ex.intent});
  return out;
}

std::pair<double, double> validation_accuracy(JointModel& model,
                                              const std::vector<Featurized>& rows) {
  std::size_t intent_hits = 0, domain_hits = 0;
  for (const auto& ex : rows) {
    ForwardOutput out = model.predict_proba(ex.input);
    if (argmax(out.p_intent) == ex.intent) ++intent_hits;
    if (argmax(out.p_domain) == ex.domain) ++domain_hits;
  }
  const auto n = static_cast<double>(rows.size());
  return {static_cast<double>(intent_hits) / n, static_cast<double>(domain_hits) / n};
}

}  // namespace

TrainResult train(const Dataset& dataset, const LabelSpace& labels,
                  const ModelConfig& model_config, const TrainConfig& config,
                  const EmbeddingStore* store, const EpochCallback& on_epoch) {
  config.validate();
  if (dataset.train.empty()) throw DataError("training split is empty");
  if (dataset.valid.empty()) throw DataError("validation split is empty");
  check_consistency(dataset, labels);

  Rng rng(config.seed);
  JointModel model(model_config, labels, rng);
  if (model_config.encoder_mode == EncoderMode::kExternal) {
    if (store == nullptr) throw ConfigError("external-embedding training needs an embedding store");
    std::vector<std::string> texts = dataset.all_texts();
    auto missing = store->missing(texts);
    if (!missing.empty()) {
      throw CoverageError(std::to_string(missing.size()) +
                          " utterances have no embedding; first missing: \"" + missing.front() +
                          "\"");
    }
  }
  const std::vector<Featurized> train_rows = featurize_split(model, dataset.train, store);
  const std::vector<Featurized> valid_rows = featurize_split(model, dataset.valid, store);

  const auto batches_per_epoch = static_cast<std::int64_t>(
      (train_rows.size() + config.batch_size - 1) / config.batch_size);
  const std::int64_t total_steps = batches_per_epoch * config.max_epochs;

  AdamW optimizer(model.parameters(), config.weight_decay);
  for (Parameter* p : model.parameters()) p->zero_grad();

  std::vector<std::size_t> order(train_rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  EarlyStopping stopper(config.patience);
  TrainHistory history;
  std::optional<JointModel> best;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      Graph g;
      std::vector<Var> losses;
      losses.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) {
        const Featurized& ex = train_rows[order[i]];
        losses.push_back(example_loss(g, model, ex.input, ex.domain, ex.intent));
      }
      Var batch_loss = g.mean(losses);
      loss_sum += g.value(batch_loss)[0] * static_cast<double>(end - start);
      g.backward(batch_loss);
      optimizer.step(lr_schedule(optimizer.steps() + 1, total_steps, config.learning_rate,
                                 config.warmup_proportion));
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = loss_sum / static_cast<double>(order.size());
    record.lambda = lambda_value(model.lambda_raw().value()[0]);
    std::tie(record.valid_intent_accuracy, record.valid_domain_accuracy) =
        validation_accuracy(model, valid_rows);
    history.epochs.push_back(record);
    if (on_epoch) on_epoch(record);

    if (stopper.update(record.valid_intent_accuracy)) {
      best = model;
      best->round_to_single();
    }
    if (stopper.should_stop()) {
      history.stop_reason = "patience";
      break;
    }
  }
  if (history.stop_reason.empty()) history.stop_reason = "max_epochs";
  history.best_epoch = stopper.best_epoch();
  return {std::move(*best), std::move(history)};
}

}  // namespace hjoint
