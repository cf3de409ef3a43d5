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

#include "hjoint/model.hpp"

#include <cmath>

#include "hjoint/error.hpp"

namespace hjoint {

std::string_view structure_name(Structure s) {
  switch (s) {
    case Structure::kFlatShared: return "flat_shared";
    case Structure::kFlatSplit: return "flat_split";
    case Structure::kHierIntentFirst: return "hier_intent_first";
    case Structure::kHierDomainFirst: return "hier_domain_first";
  }
  return "hier_domain_first";
}

Structure parse_structure(std::string_view name) {
  for (Structure s : {Structure::kFlatShared, Structure::kFlatSplit,
                      Structure::kHierIntentFirst, Structure::kHierDomainFirst}) {
    if (structure_name(s) == name) return s;
  }
  throw ConfigError("unknown structure \"" + std::string(name) +
                    "\" (flat_shared|flat_split|hier_intent_first|hier_domain_first)");
}

std::string_view head_mode_name(HeadMode m) {
  return m == HeadMode::kJoint ? "joint" : "intent_only";
}

HeadMode parse_head_mode(std::string_view name) {
  if (name == "joint") return HeadMode::kJoint;
  if (name == "intent_only") return HeadMode::kIntentOnly;
  throw ConfigError("unknown head mode \"" + std::string(name) + "\" (joint|intent_only)");
}

std::string_view encoder_mode_name(EncoderMode m) {
  return m == EncoderMode::kBuiltin ? "builtin" : "external";
}

EncoderMode parse_encoder_mode(std::string_view name) {
  if (name == "builtin") return EncoderMode::kBuiltin;
  if (name == "external") return EncoderMode::kExternal;
  throw ConfigError("unknown encoder mode \"" + std::string(name) + "\" (builtin|external)");
}

namespace {

Tensor uniform(Rng& rng, std::vector<std::size_t> shape, std::size_t fan_in) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Tensor t = Tensor::zeros(std::move(shape));
  for (double& v : t.values()) v = rng.uniform(-bound, bound);
  return t;
}

Tensor filled(std::size_t n, double v) {
  return Tensor::vector(std::vector<double>(n, v));
}

TransformBlock make_block(const std::string& prefix, std::size_t dim) {
  return {Parameter(prefix + ".weight", Tensor::zeros({dim, dim})),
          Parameter(prefix + ".bias", Tensor::zeros({dim}), false),
          Parameter(prefix + ".ln_gamma", filled(dim, 1.0), false),
          Parameter(prefix + ".ln_beta", Tensor::zeros({dim}), false)};
}

OutputHead make_head(const std::string& prefix, std::size_t classes, std::size_t dim) {
  return {Parameter(prefix + ".weight", Tensor::zeros({classes, dim})),
          Parameter(prefix + ".bias", Tensor::zeros({classes}), false)};
}

// s = relu(W input + b); out = LN(s + input)
std::pair<Var, Var> first_block(Graph& g, TransformBlock& b, Var input) {
  Var s = g.relu(g.linear(input, g.param(b.weight), g.param(b.bias)));
  Var out = g.layer_norm(g.add(s, input), g.param(b.gamma), g.param(b.beta));
  return {s, out};
}

// s = relu(W (upstream + hbar) + b); out = LN(s + upstream)
std::pair<Var, Var> stacked_block(Graph& g, TransformBlock& b, Var hbar, Var upstream) {
  Var s = g.relu(g.linear(g.add(upstream, hbar), g.param(b.weight), g.param(b.bias)));
  Var out = g.layer_norm(g.add(s, upstream), g.param(b.gamma), g.param(b.beta));
  return {s, out};
}

Var apply_head(Graph& g, OutputHead& h, Var input) {
  return g.linear(input, g.param(h.weight), g.param(h.bias));
}

std::vector<double> to_vector(const Tensor& t) {
  return {t.values().begin(), t.values().end()};
}

}  // namespace

JointModel::JointModel(ModelConfig config, LabelSpace labels)
    : config_(std::move(config)),
      labels_(std::move(labels)),
      domain_block_(make_block("domain", config_.dim)),
      intent_block_(make_block("intent", config_.dim)),
      domain_head_(make_head("domain_head", labels_.num_domains(), config_.dim)),
      intent_head_(make_head("intent_head", labels_.num_intents(), config_.dim)),
      lambda_raw_("lambda_raw", Tensor::scalar(0.0), false) {
  if (config_.dim == 0) throw ConfigError("model dimension must be positive");
  if (labels_.num_domains() < 2 || labels_.num_intents() < 2) {
    throw ConfigError("label space needs at least two domains and two intents");
  }
  config_.encoder.dim = config_.dim;
}

JointModel::JointModel(ModelConfig config, LabelSpace labels, Rng& rng)
    : JointModel(std::move(config), std::move(labels)) {
  if (config_.encoder_mode == EncoderMode::kBuiltin) encoder_.emplace(config_.encoder, rng);
  const std::size_t h = config_.dim;
  for (TransformBlock* b : {&domain_block_, &intent_block_}) {
    b->weight.value() = uniform(rng, {h, h}, h);
    b->bias.value() = uniform(rng, {h}, h);
  }
  for (OutputHead* head : {&domain_head_, &intent_head_}) {
    const std::size_t classes = head->bias.value().size();
    head->weight.value() = uniform(rng, {classes, h}, h);
    head->bias.value() = uniform(rng, {classes}, h);
  }
}

HashEncoder& JointModel::encoder() {
  if (!encoder_) throw ConfigError("model uses external embeddings; it has no builtin encoder");
  return *encoder_;
}

const HashEncoder& JointModel::encoder() const {
  if (!encoder_) throw ConfigError("model uses external embeddings; it has no builtin encoder");
  return *encoder_;
}

std::vector<Parameter*> JointModel::parameters() {
  std::vector<Parameter*> out;
  if (encoder_) out.push_back(&encoder_->table());
  for (TransformBlock* b : {&domain_block_, &intent_block_}) {
    out.insert(out.end(), {&b->weight, &b->bias, &b->gamma, &b->beta});
  }
  for (OutputHead* h : {&domain_head_, &intent_head_}) {
    out.insert(out.end(), {&h->weight, &h->bias});
  }
  out.push_back(&lambda_raw_);
  return out;
}

std::vector<const Parameter*> JointModel::parameters() const {
  auto mut = const_cast<JointModel*>(this)->parameters();
  return {mut.begin(), mut.end()};
}

PooledInput JointModel::featurize(std::string_view text, const EmbeddingStore* store) const {
  PooledInput in;
  if (config_.encoder_mode == EncoderMode::kBuiltin) {
    in.ids = encoder().ngram_ids(tokenize(text));
    if (in.ids.empty()) throw EmptyUtteranceError("utterance produced no n-grams: \"" +
                                                  std::string(text) + "\"");
    return in;
  }
  if (store == nullptr) throw ConfigError("external-embedding model needs an embedding store");
  if (store->dimension() != config_.dim) {
    throw DimensionError("embedding store dimension " + std::to_string(store->dimension()) +
                         " does not match model dimension " + std::to_string(config_.dim));
  }
  in.vector = store->lookup(text);
  return in;
}

Var JointModel::pooled(Graph& g, const PooledInput& input) {
  if (config_.encoder_mode == EncoderMode::kBuiltin) return encoder().encode(g, input.ids);
  if (input.vector.size() != config_.dim) {
    throw DimensionError("pooled vector has " + std::to_string(input.vector.size()) +
                         " entries, model dimension is " + std::to_string(config_.dim));
  }
  return g.constant(Tensor::vector(input.vector));
}

std::pair<Var, Var> JointModel::domain_path(Graph& g, Var hbar) {
  return first_block(g, domain_block_, hbar);
}

std::pair<Var, Var> JointModel::intent_path(Graph& g, Var hbar, Var d) {
  return stacked_block(g, intent_block_, hbar, d);
}

ForwardNodes JointModel::forward(Graph& g, Var hbar) {
  if (g.value(hbar).rank() != 1 || g.value(hbar).size() != config_.dim) {
    throw DimensionError("pooled vector " + g.value(hbar).shape_string() +
                         " does not match model dimension " + std::to_string(config_.dim));
  }
  ForwardNodes n{hbar, hbar, hbar, hbar, hbar, std::nullopt, hbar};
  if (config_.heads == HeadMode::kIntentOnly) {
    n.intent_logits = apply_head(g, intent_head_, hbar);
    return n;
  }
  switch (config_.structure) {
    case Structure::kHierDomainFirst:
      std::tie(n.s_d, n.d) = domain_path(g, hbar);
      std::tie(n.s_t, n.t) = intent_path(g, hbar, n.d);
      break;
    case Structure::kHierIntentFirst:
      std::tie(n.s_t, n.t) = first_block(g, intent_block_, hbar);
      std::tie(n.s_d, n.d) = stacked_block(g, domain_block_, hbar, n.t);
      break;
    case Structure::kFlatSplit:
      std::tie(n.s_d, n.d) = first_block(g, domain_block_, hbar);
      std::tie(n.s_t, n.t) = first_block(g, intent_block_, hbar);
      break;
    case Structure::kFlatShared:
      break;
  }
  n.domain_logits = apply_head(g, domain_head_, n.d);
  n.intent_logits = apply_head(g, intent_head_, n.t);
  return n;
}

ForwardOutput JointModel::predict_proba(const PooledInput& input) {
  Graph g;
  ForwardNodes n = forward(g, pooled(g, input));
  ForwardOutput out;
  out.p_intent = softmax(g.value(n.intent_logits).values());
  if (n.domain_logits) {
    out.p_domain = softmax(g.value(*n.domain_logits).values());
  } else {
    out.p_domain.assign(labels_.num_domains(), 0.0);
    for (std::size_t i = 0; i < out.p_intent.size(); ++i) {
      out.p_domain[labels_.domain_of(i)] += out.p_intent[i];
    }
  }
  out.d = to_vector(g.value(n.d));
  out.t = to_vector(g.value(n.t));
  out.s_d = to_vector(g.value(n.s_d));
  out.s_t = to_vector(g.value(n.s_t));
  return out;
}

void JointModel::round_to_single() {
  for (Parameter* p : parameters()) {
    for (double& v : p->value().values()) v = static_cast<double>(static_cast<float>(v));
  }
}

}  // namespace hjoint
