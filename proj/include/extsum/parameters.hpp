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
#include <cstdint>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "extsum/tensor.hpp"

namespace extsum {

using ParamId = std::size_t;

// One learned tensor with its gradient and the two adadelta accumulators
// (running mean of squared gradients and of squared updates).
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor mean_sq_grad;
  Tensor mean_sq_delta;
};

class ParameterStore {
 public:
  // Registers a new parameter. Names must be unique.
  ParamId add(const std::string& name, Tensor value);

  bool contains(const std::string& name) const;
  ParamId id(const std::string& name) const;
  std::size_t size() const { return params_.size(); }
  std::size_t num_values() const;

  Parameter& operator[](ParamId id) { return params_[id]; }
  const Parameter& operator[](ParamId id) const { return params_[id]; }
  Parameter& at(const std::string& name) { return params_[id(name)]; }
  const Parameter& at(const std::string& name) const {
    return params_[id(name)];
  }

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  void zero_grad();
  void scale_grad(double factor);
  double grad_norm() const;
  void reset_accumulators();

  // Copies parameter values (not gradients) from a store with the same
  // layout.
  void copy_values_from(const ParameterStore& other);

 private:
  std::vector<Parameter> params_;
  std::unordered_map<std::string, ParamId> index_;
};

// Deterministic random source for a run. All randomness (initialization,
// shuffling, synthetic data) is drawn from one of these seeded generators.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [lo, hi).
  double uniform(double lo, double hi);
  // Uniform integer in [0, n).
  std::size_t index(std::size_t n);
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

void fill_uniform(Tensor& t, double bound, Rng& rng);
// Uniform in [-r, r], r = sqrt(6 / (fan_in + fan_out)).
void fill_glorot(Tensor& t, Rng& rng);

}  // namespace extsum
