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
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hjoint/tensor.hpp"

namespace hjoint {

inline constexpr double kLayerNormEps = 1e-5;

// A trainable tensor plus its gradient accumulator.
//
// Row-sparse parameters (the hashed embedding table) keep gradients only for
// rows that were actually gathered, so a 2^18-row table never needs a dense
// gradient buffer.
class Parameter {
 public:
  Parameter() = default;
  Parameter(std::string name, Tensor value, bool decay = true,
            bool row_sparse = false);

  const std::string& name() const { return name_; }
  Tensor& value() { return value_; }
  const Tensor& value() const { return value_; }
  bool decays() const { return decay_; }
  bool row_sparse() const { return row_sparse_; }

  void zero_grad();
  void accumulate_grad(std::span<const double> g);
  void accumulate_row_grad(std::size_t row, std::span<const double> g);

  // Dense view of the gradient; only valid for dense parameters.
  const Tensor& dense_grad() const { return grad_; }
  const std::map<std::size_t, std::vector<double>>& row_grads() const {
    return row_grads_;
  }
  double grad_at(std::size_t flat_index) const;

 private:
  std::string name_;
  Tensor value_;
  Tensor grad_;
  std::map<std::size_t, std::vector<double>> row_grads_;
  bool decay_ = true;
  bool row_sparse_ = false;
};

// Handle to a node inside one Graph.
struct Var {
  std::size_t id = 0;
};

// Define-by-run reverse-mode graph. Build a fresh graph per batch, call
// backward() on a scalar node, and read gradients off the parameters.
// Nodes are appended in creation order, so reverse order is a valid
// topological order for backprop.
class Graph {
 public:
  Var constant(Tensor value);
  // One leaf per parameter per graph; repeated calls return the same node.
  Var param(Parameter& p);
  Var gather_row(Parameter& table, std::size_t row);

  Var linear(Var x, Var weight, Var bias);
  Var relu(Var x);
  Var add(Var a, Var b);
  Var layer_norm(Var x, Var gamma, Var beta, double eps = kLayerNormEps);
  Var mean_pool(std::span<const Var> rows);
  // Scalar cross-entropy -log softmax(logits)[target].
  Var softmax_xent(Var logits, std::size_t target);

  // Scalar helpers used by the joint loss.
  Var sigmoid(Var s);
  Var mul(Var a, Var b);
  Var one_minus(Var s);
  Var sum(Var x);
  Var mean(std::span<const Var> scalars);

  const Tensor& value(Var v) const { return nodes_.at(v.id).value; }
  const Tensor& grad(Var v) const { return nodes_.at(v.id).grad; }
  std::size_t size() const { return nodes_.size(); }

  // Seeds d(loss)/d(loss) = 1 and propagates to every parameter reachable
  // from `loss`. Gradients accumulate into the parameters.
  void backward(Var loss);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::vector<std::size_t> parents;
    std::function<void(Graph&, std::size_t)> backprop;
  };

  Var push(Tensor value, std::vector<std::size_t> parents,
           std::function<void(Graph&, std::size_t)> backprop, const char* op);
  Tensor& grad_of(std::size_t id);

  std::vector<Node> nodes_;
  std::map<const Parameter*, std::size_t> param_nodes_;
};

// Numerically stable softmax (max subtraction).
std::vector<double> softmax(std::span<const double> logits);

// Builds a scalar loss from the current parameter values.
using ScalarFunction = std::function<Var(Graph&)>;

// Max over parameter entries of |analytic - numeric| /
// max(1e-8, |analytic| + |numeric|), numeric by central differences.
// Row-sparse parameters are checked on the rows the function touches.
double grad_check(const ScalarFunction& f, std::span<Parameter* const> params,
                  double step = 1e-5);

}  // namespace hjoint
