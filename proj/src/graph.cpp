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

#include "hjoint/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hjoint/error.hpp"

namespace hjoint {

// ---------------------------------------------------------------------------
// Parameter

Parameter::Parameter(std::string name, Tensor value, bool decay, bool row_sparse)
    : name_(std::move(name)),
      value_(std::move(value)),
      decay_(decay),
      row_sparse_(row_sparse) {
  if (row_sparse_ && value_.rank() != 2) {
    throw DimensionError("row-sparse parameter " + name_ + " must be a matrix");
  }
  zero_grad();
}

void Parameter::zero_grad() {
  row_grads_.clear();
  if (row_sparse_) {
    grad_ = Tensor();
  } else if (grad_.shape() != value_.shape() || grad_.size() != value_.size()) {
    grad_ = Tensor::zeros(value_.shape());
  } else {
    std::fill(grad_.values().begin(), grad_.values().end(), 0.0);
  }
}

void Parameter::accumulate_grad(std::span<const double> g) {
  if (row_sparse_) throw DimensionError("dense gradient into row-sparse " + name_);
  if (g.size() != grad_.size()) {
    throw DimensionError("gradient size mismatch for " + name_);
  }
  auto out = grad_.values();
  for (std::size_t i = 0; i < g.size(); ++i) out[i] += g[i];
}

void Parameter::accumulate_row_grad(std::size_t row, std::span<const double> g) {
  if (row >= value_.rows() || g.size() != value_.cols()) {
    throw DimensionError("row gradient out of range for " + name_);
  }
  if (!row_sparse_) {
    auto out = grad_.row(row);
    for (std::size_t i = 0; i < g.size(); ++i) out[i] += g[i];
    return;
  }
  auto [it, inserted] = row_grads_.try_emplace(row, value_.cols(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) it->second[i] += g[i];
}

double Parameter::grad_at(std::size_t flat_index) const {
  if (!row_sparse_) return grad_[flat_index];
  auto it = row_grads_.find(flat_index / value_.cols());
  return it == row_grads_.end() ? 0.0 : it->second[flat_index % value_.cols()];
}

// ---------------------------------------------------------------------------
// Graph

namespace {

void require_vector(const Tensor& t, const char* op, const char* operand) {
  if (t.rank() != 1) {
    throw DimensionError(std::string(op) + ": " + operand + " must be a vector, got " +
                         t.shape_string());
  }
}

void require_scalar(const Tensor& t, const char* op) {
  if (t.size() != 1) {
    throw DimensionError(std::string(op) + ": expected a scalar, got " + t.shape_string());
  }
}

void require_same(const Tensor& a, const Tensor& b, const char* op,
                  const char* na, const char* nb) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": " + na + " " + a.shape_string() +
                         " does not match " + nb + " " + b.shape_string());
  }
}

}  // namespace

Var Graph::push(Tensor value, std::vector<std::size_t> parents,
                std::function<void(Graph&, std::size_t)> backprop,
                const char* op) {
  if (!value.all_finite()) {
    throw NumericError(std::string(op) + ": non-finite forward value");
  }
  nodes_.push_back(Node{std::move(value), Tensor(), std::move(parents),
                        std::move(backprop)});
  return Var{nodes_.size() - 1};
}

Tensor& Graph::grad_of(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.size() == 0) n.grad = Tensor::zeros(n.value.shape());
  return n.grad;
}

Var Graph::constant(Tensor value) {
  return push(std::move(value), {}, nullptr, "constant");
}

Var Graph::param(Parameter& p) {
  if (p.row_sparse()) {
    throw DimensionError("param: row-sparse " + p.name() + " must be read through gather_row");
  }
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return Var{it->second};
  Parameter* target = &p;
  Var v = push(p.value(), {}, [target](Graph& g, std::size_t self) {
    target->accumulate_grad(g.nodes_[self].grad.values());
  }, "param");
  param_nodes_.emplace(&p, v.id);
  return v;
}

Var Graph::gather_row(Parameter& table, std::size_t row) {
  if (table.value().rank() != 2 || row >= table.value().rows()) {
    throw DimensionError("gather_row: row " + std::to_string(row) +
                         " outside table " + table.value().shape_string());
  }
  auto r = table.value().row(row);
  Parameter* target = &table;
  return push(Tensor::vector({r.begin(), r.end()}), {},
              [target, row](Graph& g, std::size_t self) {
                target->accumulate_row_grad(row, g.nodes_[self].grad.values());
              },
              "gather_row");
}

Var Graph::linear(Var x, Var weight, Var bias) {
  const Tensor& xv = value(x);
  const Tensor& w = value(weight);
  const Tensor& b = value(bias);
  require_vector(xv, "linear", "x");
  require_vector(b, "linear", "b");
  if (w.rank() != 2 || w.cols() != xv.size() || w.rows() != b.size()) {
    throw DimensionError("linear: W " + w.shape_string() + ", x " + xv.shape_string() +
                         ", b " + b.shape_string() + " do not conform");
  }
  const std::size_t m = w.rows(), n = w.cols();
  Tensor out = b;
  for (std::size_t i = 0; i < m; ++i) {
    double acc = out[i];
    auto wr = w.row(i);
    for (std::size_t j = 0; j < n; ++j) acc += wr[j] * xv[j];
    out[i] = acc;
  }
  return push(std::move(out), {x.id, weight.id, bias.id},
              [x, weight, bias, m, n](Graph& g, std::size_t self) {
                const Tensor up = g.nodes_[self].grad;
                const Tensor& xv = g.nodes_[x.id].value;
                const Tensor& w = g.nodes_[weight.id].value;
                Tensor& gx = g.grad_of(x.id);
                for (std::size_t i = 0; i < m; ++i) {
                  auto wr = w.row(i);
                  for (std::size_t j = 0; j < n; ++j) gx[j] += wr[j] * up[i];
                }
                Tensor& gw = g.grad_of(weight.id);
                for (std::size_t i = 0; i < m; ++i) {
                  auto gr = gw.row(i);
                  for (std::size_t j = 0; j < n; ++j) gr[j] += up[i] * xv[j];
                }
                Tensor& gb = g.grad_of(bias.id);
                for (std::size_t i = 0; i < m; ++i) gb[i] += up[i];
              },
              "linear");
}

Var Graph::relu(Var x) {
  Tensor out = value(x);
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  return push(std::move(out), {x.id}, [x](Graph& g, std::size_t self) {
    const Tensor up = g.nodes_[self].grad;
    const Tensor& xv = g.nodes_[x.id].value;
    Tensor& gx = g.grad_of(x.id);
    for (std::size_t i = 0; i < xv.size(); ++i) {
      if (xv[i] > 0.0) gx[i] += up[i];
    }
  }, "relu");
}

Var Graph::add(Var a, Var b) {
  require_same(value(a), value(b), "add", "lhs", "rhs");
  Tensor out = value(a);
  const Tensor& bv = value(b);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return push(std::move(out), {a.id, b.id}, [a, b](Graph& g, std::size_t self) {
    const Tensor up = g.nodes_[self].grad;
    Tensor& ga = g.grad_of(a.id);
    for (std::size_t i = 0; i < up.size(); ++i) ga[i] += up[i];
    Tensor& gb = g.grad_of(b.id);
    for (std::size_t i = 0; i < up.size(); ++i) gb[i] += up[i];
  }, "add");
}

Var Graph::layer_norm(Var x, Var gamma, Var beta, double eps) {
  const Tensor& xv = value(x);
  require_vector(xv, "layer_norm", "x");
  require_same(xv, value(gamma), "layer_norm", "x", "gamma");
  require_same(xv, value(beta), "layer_norm", "x", "beta");
  if (!(eps > 0.0)) throw NumericError("layer_norm: eps must be positive");
  const std::size_t n = xv.size();
  double mean = 0.0;
  for (double v : xv.values()) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : xv.values()) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);
  const double inv_std = 1.0 / std::sqrt(var + eps);

  Tensor normalized = Tensor::zeros({n});
  for (std::size_t i = 0; i < n; ++i) normalized[i] = (xv[i] - mean) * inv_std;
  Tensor out = Tensor::zeros({n});
  const Tensor& gv = value(gamma);
  const Tensor& bv = value(beta);
  for (std::size_t i = 0; i < n; ++i) out[i] = gv[i] * normalized[i] + bv[i];

  return push(std::move(out), {x.id, gamma.id, beta.id},
              [x, gamma, beta, normalized = std::move(normalized), inv_std, n](
                  Graph& g, std::size_t self) {
                const Tensor up = g.nodes_[self].grad;
                const Tensor& gv = g.nodes_[gamma.id].value;
                // d(normalized) = up * gamma
                double mean_dn = 0.0, mean_dn_n = 0.0;
                std::vector<double> dn(n);
                for (std::size_t i = 0; i < n; ++i) {
                  dn[i] = up[i] * gv[i];
                  mean_dn += dn[i];
                  mean_dn_n += dn[i] * normalized[i];
                }
                mean_dn /= static_cast<double>(n);
                mean_dn_n /= static_cast<double>(n);
                Tensor& gx = g.grad_of(x.id);
                for (std::size_t i = 0; i < n; ++i) {
                  gx[i] += inv_std * (dn[i] - mean_dn - normalized[i] * mean_dn_n);
                }
                Tensor& gg = g.grad_of(gamma.id);
                for (std::size_t i = 0; i < n; ++i) gg[i] += up[i] * normalized[i];
                Tensor& gb = g.grad_of(beta.id);
                for (std::size_t i = 0; i < n; ++i) gb[i] += up[i];
              },
              "layer_norm");
}

Var Graph::mean_pool(std::span<const Var> rows) {
  if (rows.empty()) throw EmptySequenceError("mean_pool: no rows to average");
  const Tensor& first = value(rows[0]);
  require_vector(first, "mean_pool", "row");
  Tensor out = Tensor::zeros(first.shape());
  for (Var r : rows) {
    require_same(first, value(r), "mean_pool", "row 0", "row");
    const Tensor& rv = value(r);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += rv[i];
  }
  const double k = static_cast<double>(rows.size());
  for (double& v : out.values()) v /= k;
  std::vector<std::size_t> parents;
  for (Var r : rows) parents.push_back(r.id);
  return push(std::move(out), parents, [](Graph& g, std::size_t self) {
    const Tensor up = g.nodes_[self].grad;
    const std::vector<std::size_t> parents = g.nodes_[self].parents;
    const double k = static_cast<double>(parents.size());
    for (std::size_t p : parents) {
      Tensor& gp = g.grad_of(p);
      for (std::size_t i = 0; i < up.size(); ++i) gp[i] += up[i] / k;
    }
  }, "mean_pool");
}

Var Graph::softmax_xent(Var logits, std::size_t target) {
  const Tensor& lv = value(logits);
  require_vector(lv, "softmax_xent", "logits");
  if (target >= lv.size()) {
    throw LabelError("softmax_xent: target " + std::to_string(target) +
                     " outside [0, " + std::to_string(lv.size()) + ")");
  }
  double max = *std::max_element(lv.values().begin(), lv.values().end());
  double denom = 0.0;
  for (double v : lv.values()) denom += std::exp(v - max);
  const double log_z = max + std::log(denom);
  std::vector<double> probs(lv.size());
  for (std::size_t i = 0; i < lv.size(); ++i) probs[i] = std::exp(lv[i] - log_z);
  const double loss = log_z - lv[target];
  return push(Tensor::scalar(loss), {logits.id},
              [logits, target, probs = std::move(probs)](Graph& g, std::size_t self) {
                const double up = g.nodes_[self].grad[0];
                Tensor& gl = g.grad_of(logits.id);
                for (std::size_t i = 0; i < probs.size(); ++i) {
                  gl[i] += up * (probs[i] - (i == target ? 1.0 : 0.0));
                }
              },
              "softmax_xent");
}

Var Graph::sigmoid(Var s) {
  require_scalar(value(s), "sigmoid");
  const double z = value(s)[0];
  // Branches keep exp() from overflowing for large |z|.
  const double y = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z))
                            : std::exp(z) / (1.0 + std::exp(z));
  return push(Tensor::scalar(y), {s.id}, [s, y](Graph& g, std::size_t self) {
    g.grad_of(s.id)[0] += g.nodes_[self].grad[0] * y * (1.0 - y);
  }, "sigmoid");
}

Var Graph::mul(Var a, Var b) {
  require_scalar(value(a), "mul");
  require_scalar(value(b), "mul");
  const double av = value(a)[0], bv = value(b)[0];
  return push(Tensor::scalar(av * bv), {a.id, b.id},
              [a, b, av, bv](Graph& g, std::size_t self) {
                const double up = g.nodes_[self].grad[0];
                g.grad_of(a.id)[0] += up * bv;
                g.grad_of(b.id)[0] += up * av;
              },
              "mul");
}

Var Graph::one_minus(Var s) {
  require_scalar(value(s), "one_minus");
  return push(Tensor::scalar(1.0 - value(s)[0]), {s.id}, [s](Graph& g, std::size_t self) {
    g.grad_of(s.id)[0] -= g.nodes_[self].grad[0];
  }, "one_minus");
}

Var Graph::sum(Var x) {
  double total = 0.0;
  for (double v : value(x).values()) total += v;
  return push(Tensor::scalar(total), {x.id}, [x](Graph& g, std::size_t self) {
    const double up = g.nodes_[self].grad[0];
    for (double& v : g.grad_of(x.id).values()) v += up;
  }, "sum");
}

Var Graph::mean(std::span<const Var> scalars) {
  if (scalars.empty()) throw EmptySequenceError("mean: no scalars to average");
  double total = 0.0;
  std::vector<std::size_t> parents;
  for (Var s : scalars) {
    require_scalar(value(s), "mean");
    total += value(s)[0];
    parents.push_back(s.id);
  }
  const double k = static_cast<double>(scalars.size());
  return push(Tensor::scalar(total / k), std::move(parents),
              [](Graph& g, std::size_t self) {
                const double up = g.nodes_[self].grad[0];
                const std::vector<std::size_t> parents = g.nodes_[self].parents;
                const double k = static_cast<double>(parents.size());
                for (std::size_t p : parents) g.grad_of(p)[0] += up / k;
              },
              "mean");
}

void Graph::backward(Var loss) {
  require_scalar(value(loss), "backward");
  for (Node& n : nodes_) n.grad = Tensor();
  grad_of(loss.id)[0] = 1.0;
  for (std::size_t id = loss.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (n.grad.size() == 0 || !n.backprop) continue;
    if (!n.grad.all_finite()) {
      throw NumericError("backward: non-finite gradient at node " + std::to_string(id));
    }
    // grad_of() never reallocates nodes_, so `n` stays valid here.
    n.backprop(*this, id);
  }
}

// ---------------------------------------------------------------------------

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw EmptySequenceError("softmax: empty logits");
  double max = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double denom = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - max);
    denom += out[i];
  }
  for (double& v : out) v /= denom;
  return out;
}

double grad_check(const ScalarFunction& f, std::span<Parameter* const> params,
                  double step) {
  auto evaluate = [&f]() {
    Graph g;
    double v = g.value(f(g))[0];
    if (!std::isfinite(v)) throw NumericError("grad_check: non-finite function value");
    return v;
  };

  for (Parameter* p : params) p->zero_grad();
  {
    Graph g;
    Var loss = f(g);
    if (!g.value(loss).all_finite()) {
      throw NumericError("grad_check: non-finite function value");
    }
    g.backward(loss);
  }

  double worst = 0.0;
  for (Parameter* p : params) {
    std::vector<std::size_t> entries;
    if (p->row_sparse()) {
      const std::size_t cols = p->value().cols();
      for (const auto& [row, _] : p->row_grads()) {
        for (std::size_t c = 0; c < cols; ++c) entries.push_back(row * cols + c);
      }
    } else {
      for (std::size_t i = 0; i < p->value().size(); ++i) entries.push_back(i);
    }
    for (std::size_t i : entries) {
      const double analytic = p->grad_at(i);
      double& slot = p->value()[i];
      const double saved = slot;
      slot = saved + step;
      const double up = evaluate();
      slot = saved - step;
      const double down = evaluate();
      slot = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double err = std::abs(analytic - numeric) /
                         std::max(1e-8, std::abs(analytic) + std::abs(numeric));
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace hjoint
