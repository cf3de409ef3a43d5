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
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hjoint/data.hpp"
#include "hjoint/encoder.hpp"
#include "hjoint/graph.hpp"
#include "hjoint/random.hpp"

namespace hjoint {

// How the domain and intent representations are wired.
enum class Structure {
  kFlatShared,       // both heads read the pooled vector directly
  kFlatSplit,        // independent domain and intent branches off the pooled vector
  kHierIntentFirst,  // intent block first, domain block stacked on it
  kHierDomainFirst,  // domain block first, intent block stacked on it
};

std::string_view structure_name(Structure s);
Structure parse_structure(std::string_view name);

enum class HeadMode {
  kJoint,       // domain and intent heads, lambda-mixed loss
  kIntentOnly,  // single intent head on the pooled vector
};

std::string_view head_mode_name(HeadMode m);
HeadMode parse_head_mode(std::string_view name);

enum class EncoderMode { kBuiltin, kExternal };

std::string_view encoder_mode_name(EncoderMode m);
EncoderMode parse_encoder_mode(std::string_view name);

struct ModelConfig {
  std::size_t dim = 256;
  Structure structure = Structure::kHierDomainFirst;
  HeadMode heads = HeadMode::kJoint;
  EncoderMode encoder_mode = EncoderMode::kBuiltin;
  HashEncoderConfig encoder;  // used in builtin mode; encoder.dim tracks dim
};

// Dense layer + ReLU, then residual + layer norm.
struct TransformBlock {
  Parameter weight;  // [H x H]
  Parameter bias;    // [H]
  Parameter gamma;   // [H]
  Parameter beta;    // [H]
};

struct OutputHead {
  Parameter weight;  // [classes x H]
  Parameter bias;    // [classes]
};

// Model input: hashed n-gram ids for the builtin encoder, or a precomputed
// pooled vector in external mode.
struct PooledInput {
  std::vector<std::uint32_t> ids;
  std::vector<double> vector;
};

// Graph handles produced by one forward pass. For kFlatShared every
// representation is the pooled vector itself. For kIntentOnly only
// hbar and intent_logits are meaningful.
struct ForwardNodes {
  Var hbar, s_d, d, s_t, t;
  std::optional<Var> domain_logits;
  Var intent_logits;
};

// Probabilities and representations as plain values. An intent-only model
// has no domain head; its p_domain is the intent distribution summed per
// mapped domain.
struct ForwardOutput {
  std::vector<double> p_domain;
  std::vector<double> p_intent;
  std::vector<double> d, t, s_d, s_t;
};

class JointModel {
 public:
  // Fresh model with seeded uniform(+-1/sqrt(fan_in)) weights, gamma = 1,
  // beta = 0 and lambda_raw = 0.
  JointModel(ModelConfig config, LabelSpace labels, Rng& rng);

  const ModelConfig& config() const { return config_; }
  const LabelSpace& labels() const { return labels_; }
  std::size_t dim() const { return config_.dim; }

  bool has_encoder() const { return encoder_.has_value(); }
  HashEncoder& encoder();
  const HashEncoder& encoder() const;

  TransformBlock& domain_block() { return domain_block_; }
  TransformBlock& intent_block() { return intent_block_; }
  OutputHead& domain_head() { return domain_head_; }
  OutputHead& intent_head() { return intent_head_; }
  Parameter& lambda_raw() { return lambda_raw_; }
  const Parameter& lambda_raw() const { return lambda_raw_; }

  // Every parameter in checkpoint order.
  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;

  // Builtin mode tokenizes and hashes; external mode looks the text up.
  PooledInput featurize(std::string_view text, const EmbeddingStore* store) const;

  Var pooled(Graph& g, const PooledInput& input);

  // Domain path: s_d = relu(W_d hbar + b_d), d = LN(s_d + hbar).
  std::pair<Var, Var> domain_path(Graph& g, Var hbar);
  // Intent path on top of d: s_t = relu(W_t (d + hbar) + b_t), t = LN(s_t + d).
  std::pair<Var, Var> intent_path(Graph& g, Var hbar, Var d);

  ForwardNodes forward(Graph& g, Var hbar);
  ForwardOutput predict_proba(const PooledInput& input);

  // Rounds every parameter to the nearest float, the precision checkpoints
  // store, so an in-memory model predicts exactly like its saved copy.
  void round_to_single();

 private:
  JointModel(ModelConfig config, LabelSpace labels);

  ModelConfig config_;
  LabelSpace labels_;
  std::optional<HashEncoder> encoder_;
  TransformBlock domain_block_;
  TransformBlock intent_block_;
  OutputHead domain_head_;
  OutputHead intent_head_;
  Parameter lambda_raw_;

  friend JointModel read_checkpoint(std::istream& in);
};

}  // namespace hjoint
