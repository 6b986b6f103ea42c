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

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "extsum/parameters.hpp"
#include "extsum/tensor.hpp"

namespace extsum::ad {

enum class Op {
  kConstant,
  kLeaf,       // differentiable input owned by the tape
  kParameter,  // leaf bound to a ParameterStore entry
  kMatMul,
  kAdd,
  kSub,
  kHadamard,
  kScale,
  kNegate,
  kSigmoid,
  kTanh,
  kOneMinus,
  kConcat,
  kMeanPool,
  kSum,
  kDot,
  kRow,
  kScaleBy,
  kBce,
  kSoftmaxNll,
};

const char* op_name(Op op);

class Tape;

// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
struct Var {
  Tape* tape = nullptr;
  int id = -1;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  // Value of a one-element tensor.
  double scalar() const;
};

// Dynamic reverse-mode tape. Nodes are appended in evaluation order, which
// is a topological order of the graph, so backward is a single reverse
// sweep. Gradients of parameter leaves accumulate directly into the
// ParameterStore the tape was created with.
//
// A tape is built per example and must not be shared between threads.
class Tape {
 public:
  Tape() = default;
  // Parameter gradients accumulate into the store on backward.
  explicit Tape(ParameterStore* store) : values_(store), grads_(store) {}
  // Forward-only view of a store; backward into its parameters throws.
  explicit Tape(const ParameterStore* store) : values_(store) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var leaf(Tensor value);
  // Each parameter is materialized once per tape; repeated calls return the
  // same node.
  Var param(ParamId id);
  Var param(const std::string& name);

  const Tensor& value(int id) const;
  // dL/d(node) after backward. Zeros for nodes not reached.
  Tensor grad(Var v) const;
  Op op(Var v) const { return nodes_[v.id].op; }
  std::span<const int> inputs(Var v) const { return nodes_[v.id].inputs; }
  std::size_t size() const { return nodes_.size(); }
  const ParameterStore* store() const { return values_; }

  // Accumulates seed * d(root)/d(node) into every node reachable from root.
  // Root must hold a single element.
  void backward(Var root, double seed = 1.0);
  // Clears tape-held gradients. Parameter gradients live in the store and
  // are cleared with ParameterStore::zero_grad.
  void zero_grad();

  // Low-level node construction used by the op functions below.
  Var push(Op op, std::vector<int> inputs, Tensor value, double aux = 0.0,
           std::size_t index = 0);

 private:
  struct Node {
    Op op;
    std::vector<int> inputs;
    Tensor value;
    Tensor grad;
    bool has_grad = false;
    double aux = 0.0;
    std::size_t index = 0;  // row / target / parameter id
  };

  Tensor& grad_ref(int id);
  void propagate(int id);

  const ParameterStore* values_ = nullptr;
  ParameterStore* grads_ = nullptr;
  std::vector<Node> nodes_;
  std::vector<int> param_nodes_;
};

// Matrix product. A rank-1 right operand is treated as a column vector and
// the result is rank 1.
Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var hadamard(Var a, Var b);
Var scale(Var a, double factor);
Var negate(Var a);
Var sigmoid(Var a);
Var tanh(Var a);
Var one_minus(Var a);
Var concat(std::span<const Var> parts);
Var concat(Var a, Var b);
Var mean_pool(std::span<const Var> vs);
// Sum of all elements, as a one-element vector.
Var sum(Var a);
Var dot(Var a, Var b);
// Row r of a matrix, as a vector (embedding lookup).
Var row(Var matrix, std::size_t r);
// Vector times a one-element scalar node.
Var scale_by(Var v, Var s);

inline constexpr double kLogClamp = 1e-12;

// -[y log p + (1-y) log(1-p)] with p clamped to [1e-12, 1 - 1e-12].
Var bce_loss(Var p, int label);
// -log softmax(logits)[target], computed with max subtraction.
Var softmax_nll(Var logits, std::size_t target);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return hadamard(a, b); }

}  // namespace extsum::ad
