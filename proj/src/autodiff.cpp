// Copyright 2026 The extsum Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "extsum/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "extsum/errors.hpp"

namespace extsum::ad {
namespace {

void require_same_shape(const char* what, Var a, Var b) {
  if (!(a.shape() == b.shape())) {
    throw DimensionError(std::string(what) + ": shape mismatch " +
                         a.shape().str() + " vs " + b.shape().str());
  }
}

void require_vector(const char* what, Var a) {
  if (a.shape().rank() != 1) {
    throw DimensionError(std::string(what) + ": expected a vector, got " +
                         a.shape().str());
  }
}

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

template <typename F>
Var unary(Op op, Var a, F f, double aux = 0.0) {
  Tensor out(a.shape());
  const auto in = a.value().data();
  auto o = out.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = f(in[i]);
  return a.tape->push(op, {a.id}, std::move(out), aux);
}

template <typename F>
Var binary(Op op, const char* what, Var a, Var b, F f) {
  if (a.tape != b.tape) throw PreconditionError("operands on different tapes");
  require_same_shape(what, a, b);
  Tensor out(a.shape());
  const auto x = a.value().data();
  const auto y = b.value().data();
  auto o = out.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = f(x[i], y[i]);
  return a.tape->push(op, {a.id, b.id}, std::move(out));
}

}  // namespace

const char* op_name(Op op) {
  switch (op) {
    case Op::kConstant: return "constant";
    case Op::kLeaf: return "leaf";
    case Op::kParameter: return "parameter";
    case Op::kMatMul: return "matmul";
    case Op::kAdd: return "add";
    case Op::kSub: return "sub";
    case Op::kHadamard: return "hadamard";
    case Op::kScale: return "scale";
    case Op::kNegate: return "negate";
    case Op::kSigmoid: return "sigmoid";
    case Op::kTanh: return "tanh";
    case Op::kOneMinus: return "one_minus";
    case Op::kConcat: return "concat";
    case Op::kMeanPool: return "mean_pool";
    case Op::kSum: return "sum";
    case Op::kDot: return "dot";
    case Op::kRow: return "row";
    case Op::kScaleBy: return "scale_by";
    case Op::kBce: return "bce_loss";
    case Op::kSoftmaxNll: return "softmax_nll";
  }
  return "?";
}

const Tensor& Var::value() const { return tape->value(id); }

double Var::scalar() const {
  const Tensor& v = value();
  if (v.size() != 1) {
    throw DimensionError("scalar() on tensor of shape " + v.shape().str());
  }
  return v[0];
}

Var Tape::push(Op op, std::vector<int> inputs, Tensor value, double aux,
               std::size_t index) {
  nodes_.push_back(
      Node{op, std::move(inputs), std::move(value), Tensor(), false, aux, index});
  return Var{this, static_cast<int>(nodes_.size() - 1)};
}

Var Tape::constant(Tensor value) {
  return push(Op::kConstant, {}, std::move(value));
}

Var Tape::leaf(Tensor value) { return push(Op::kLeaf, {}, std::move(value)); }

Var Tape::param(ParamId pid) {
  if (!values_) throw PreconditionError("tape has no parameter store");
  if (pid >= values_->size()) throw IndexError("parameter id out of range");
  if (param_nodes_.size() < values_->size()) {
    param_nodes_.resize(values_->size(), -1);
  }
  if (param_nodes_[pid] >= 0) return Var{this, param_nodes_[pid]};
  // Parameter nodes hold no value copy; value() reads through to the store.
  Var v = push(Op::kParameter, {}, Tensor(), 0.0, pid);
  param_nodes_[pid] = v.id;
  return v;
}

Var Tape::param(const std::string& name) {
  if (!values_) throw PreconditionError("tape has no parameter store");
  return param(values_->id(name));
}

const Tensor& Tape::value(int id) const {
  const Node& n = nodes_[id];
  if (n.op == Op::kParameter) return (*values_)[n.index].value;
  return n.value;
}

Tensor Tape::grad(Var v) const {
  const Node& n = nodes_[v.id];
  if (n.op == Op::kParameter) return (*values_)[n.index].grad;
  if (!n.has_grad) return Tensor(value(v.id).shape());
  return n.grad;
}

Tensor& Tape::grad_ref(int id) {
  Node& n = nodes_[id];
  if (n.op == Op::kParameter) {
    if (!grads_) throw PreconditionError("tape was built on a read-only store");
    return (*grads_)[n.index].grad;
  }
  if (!n.has_grad) {
    n.grad = Tensor(n.value.shape());
    n.has_grad = true;
  }
  return n.grad;
}

void Tape::zero_grad() {
  for (auto& n : nodes_) {
    n.grad = Tensor();
    n.has_grad = false;
  }
}

void Tape::backward(Var root, double seed) {
  if (root.tape != this) throw PreconditionError("root is on another tape");
  if (value(root.id).size() != 1) {
    throw PreconditionError("backward requires a scalar root, got shape " +
                            value(root.id).shape().str());
  }
  grad_ref(root.id)[0] += seed;
  for (int i = root.id; i >= 0; --i) {
    if (nodes_[i].has_grad) propagate(i);
  }
}

void Tape::propagate(int id) {
  // No nodes are appended during backward, so references into nodes_ stay
  // valid across grad_ref calls.
  const Op op = nodes_[id].op;
  const Tensor& g = nodes_[id].grad;
  const Tensor& y = nodes_[id].value;
  const std::vector<int>& in = nodes_[id].inputs;

  switch (op) {
    case Op::kConstant:
    case Op::kLeaf:
    case Op::kParameter:
      return;
    case Op::kMatMul: {
      const Tensor& a = value(in[0]);
      const Tensor& b = value(in[1]);
      const std::size_t m = a.rows();
      const std::size_t k = a.cols();
      const std::size_t n = b.shape().rank() == 1 ? 1 : b.cols();
      if (nodes_[in[0]].op != Op::kConstant) {
        Tensor& ga = grad_ref(in[0]);
        // ga += g * b^T
        for (std::size_t i = 0; i < m; ++i) {
          const double* grow = g.data().data() + i * n;
          double* garow = ga.data().data() + i * k;
          for (std::size_t p = 0; p < k; ++p) {
            const double* brow = b.data().data() + p * n;
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += grow[j] * brow[j];
            garow[p] += s;
          }
        }
      }
      if (nodes_[in[1]].op != Op::kConstant) {
        Tensor& gb = grad_ref(in[1]);
        // gb += a^T * g
        for (std::size_t i = 0; i < m; ++i) {
          const double* arow = a.data().data() + i * k;
          const double* grow = g.data().data() + i * n;
          for (std::size_t p = 0; p < k; ++p) {
            const double aip = arow[p];
            double* gbrow = gb.data().data() + p * n;
            for (std::size_t j = 0; j < n; ++j) gbrow[j] += aip * grow[j];
          }
        }
      }
      return;
    }
    case Op::kAdd:
      grad_ref(in[0]).axpy(1.0, g);
      grad_ref(in[1]).axpy(1.0, g);
      return;
    case Op::kSub:
      grad_ref(in[0]).axpy(1.0, g);
      grad_ref(in[1]).axpy(-1.0, g);
      return;
    case Op::kHadamard: {
      const Tensor& a = value(in[0]);
      const Tensor& b = value(in[1]);
      {
        Tensor& ga = grad_ref(in[0]);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * b[i];
      }
      Tensor& gb = grad_ref(in[1]);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * a[i];
      return;
    }
    case Op::kScale:
      grad_ref(in[0]).axpy(nodes_[id].aux, g);
      return;
    case Op::kNegate:
      grad_ref(in[0]).axpy(-1.0, g);
      return;
    case Op::kOneMinus:
      grad_ref(in[0]).axpy(-1.0, g);
      return;
    case Op::kSigmoid: {
      Tensor& ga = grad_ref(in[0]);
      for (std::size_t i = 0; i < g.size(); ++i)
        ga[i] += g[i] * y[i] * (1.0 - y[i]);
      return;
    }
    case Op::kTanh: {
      Tensor& ga = grad_ref(in[0]);
      for (std::size_t i = 0; i < g.size(); ++i)
        ga[i] += g[i] * (1.0 - y[i] * y[i]);
      return;
    }
    case Op::kConcat: {
      std::size_t offset = 0;
      for (int part : in) {
        const std::size_t len = value(part).size();
        Tensor& gp = grad_ref(part);
        for (std::size_t i = 0; i < len; ++i) gp[i] += g[offset + i];
        offset += len;
      }
      return;
    }
    case Op::kMeanPool: {
      const double w = 1.0 / static_cast<double>(in.size());
      for (int part : in) grad_ref(part).axpy(w, g);
      return;
    }
    case Op::kSum: {
      Tensor& ga = grad_ref(in[0]);
      for (double& x : ga.data()) x += g[0];
      return;
    }
    case Op::kDot: {
      const Tensor& a = value(in[0]);
      const Tensor& b = value(in[1]);
      grad_ref(in[0]).axpy(g[0], b);
      grad_ref(in[1]).axpy(g[0], a);
      return;
    }
    case Op::kRow: {
      Tensor& gm = grad_ref(in[0]);
      auto r = gm.row(nodes_[id].index);
      for (std::size_t i = 0; i < r.size(); ++i) r[i] += g[i];
      return;
    }
    case Op::kScaleBy: {
      const Tensor& v = value(in[0]);
      const double s = value(in[1])[0];
      grad_ref(in[0]).axpy(s, g);
      double acc = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * v[i];
      grad_ref(in[1])[0] += acc;
      return;
    }
    case Op::kBce: {
      const double p = value(in[0])[0];
      const double label = nodes_[id].aux;
      // Zero slope outside the clamp window.
      if (p <= kLogClamp || p >= 1.0 - kLogClamp) return;
      grad_ref(in[0])[0] += g[0] * (-label / p + (1.0 - label) / (1.0 - p));
      return;
    }
    case Op::kSoftmaxNll: {
      const Tensor& logits = value(in[0]);
      const double mx = *std::max_element(logits.data().begin(), logits.data().end());
      double z = 0.0;
      for (double l : logits.data()) z += std::exp(l - mx);
      Tensor& gl = grad_ref(in[0]);
      for (std::size_t i = 0; i < logits.size(); ++i) {
        double p = std::exp(logits[i] - mx) / z;
        if (i == nodes_[id].index) p -= 1.0;
        gl[i] += g[0] * p;
      }
      return;
    }
  }
}

Var matmul(Var a, Var b) {
  if (a.tape != b.tape) throw PreconditionError("operands on different tapes");
  if (a.shape().rank() != 2) {
    throw DimensionError("matmul: left operand must be a matrix, got " +
                         a.shape().str() + " x " + b.shape().str());
  }
  Tensor out = extsum::matmul(a.value(), b.value());
  return a.tape->push(Op::kMatMul, {a.id, b.id}, std::move(out));
}

Var add(Var a, Var b) {
  return binary(Op::kAdd, "add", a, b, [](double x, double y) { return x + y; });
}

Var sub(Var a, Var b) {
  return binary(Op::kSub, "sub", a, b, [](double x, double y) { return x - y; });
}

Var hadamard(Var a, Var b) {
  return binary(Op::kHadamard, "hadamard", a, b,
                [](double x, double y) { return x * y; });
}

Var scale(Var a, double factor) {
  return unary(Op::kScale, a, [factor](double x) { return factor * x; }, factor);
}

Var negate(Var a) {
  return unary(Op::kNegate, a, [](double x) { return -x; });
}

Var sigmoid(Var a) { return unary(Op::kSigmoid, a, stable_sigmoid); }

Var tanh(Var a) {
  return unary(Op::kTanh, a, [](double x) { return std::tanh(x); });
}

Var one_minus(Var a) {
  return unary(Op::kOneMinus, a, [](double x) { return 1.0 - x; });
}

Var concat(std::span<const Var> parts) {
  if (parts.empty()) throw PreconditionError("concat of zero operands");
  std::vector<double> data;
  std::vector<int> ids;
  for (const Var& p : parts) {
    require_vector("concat", p);
    const auto v = p.value().data();
    data.insert(data.end(), v.begin(), v.end());
    ids.push_back(p.id);
  }
  return parts.front().tape->push(Op::kConcat, std::move(ids),
                                  Tensor::vector(std::move(data)));
}

Var concat(Var a, Var b) {
  const Var parts[] = {a, b};
  return concat(parts);
}

Var mean_pool(std::span<const Var> vs) {
  if (vs.empty()) throw PreconditionError("mean_pool of an empty list");
  Tensor out(vs.front().shape());
  std::vector<int> ids;
  for (const Var& v : vs) {
    require_same_shape("mean_pool", vs.front(), v);
    out.axpy(1.0, v.value());
    ids.push_back(v.id);
  }
  const double w = 1.0 / static_cast<double>(vs.size());
  for (double& x : out.data()) x *= w;
  return vs.front().tape->push(Op::kMeanPool, std::move(ids), std::move(out));
}

Var sum(Var a) {
  double s = 0.0;
  for (double x : a.value().data()) s += x;
  return a.tape->push(Op::kSum, {a.id}, Tensor::scalar(s));
}

Var dot(Var a, Var b) {
  require_vector("dot", a);
  require_same_shape("dot", a, b);
  double s = 0.0;
  const auto x = a.value().data();
  const auto y = b.value().data();
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return a.tape->push(Op::kDot, {a.id, b.id}, Tensor::scalar(s));
}

Var row(Var matrix, std::size_t r) {
  const Tensor& m = matrix.value();
  if (m.shape().rank() != 2) throw DimensionError("row: operand is not a matrix");
  if (r >= m.rows()) {
    throw IndexError("row " + std::to_string(r) + " out of range for " +
                     m.shape().str());
  }
  const auto src = m.row(r);
  return matrix.tape->push(Op::kRow, {matrix.id},
                           Tensor::vector(std::vector<double>(src.begin(), src.end())),
                           0.0, r);
}

Var scale_by(Var v, Var s) {
  if (s.value().size() != 1) {
    throw DimensionError("scale_by: factor must have one element, got " +
                         s.shape().str());
  }
  const double f = s.value()[0];
  Tensor out(v.shape());
  const auto x = v.value().data();
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = f * x[i];
  return v.tape->push(Op::kScaleBy, {v.id, s.id}, std::move(out));
}

Var bce_loss(Var p, int label) {
  if (p.value().size() != 1) throw DimensionError("bce_loss expects a scalar");
  if (label != 0 && label != 1) throw PreconditionError("label must be 0 or 1");
  const double pc = std::clamp(p.value()[0], kLogClamp, 1.0 - kLogClamp);
  const double loss = label ? -std::log(pc) : -std::log(1.0 - pc);
  return p.tape->push(Op::kBce, {p.id}, Tensor::scalar(loss),
                      static_cast<double>(label));
}

Var softmax_nll(Var logits, std::size_t target) {
  require_vector("softmax_nll", logits);
  const Tensor& l = logits.value();
  if (target >= l.size()) {
    throw IndexError("softmax_nll target " + std::to_string(target) +
                     " out of range for " + std::to_string(l.size()) +
                     " classes");
  }
  const double mx = *std::max_element(l.data().begin(), l.data().end());
  double z = 0.0;
  for (double x : l.data()) z += std::exp(x - mx);
  const double loss = std::log(z) - (l[target] - mx);
  return logits.tape->push(Op::kSoftmaxNll, {logits.id}, Tensor::scalar(loss),
                           0.0, target);
}

}  // namespace extsum::ad
