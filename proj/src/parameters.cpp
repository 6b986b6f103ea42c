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

#include "extsum/parameters.hpp"

#include <cmath>

#include "extsum/errors.hpp"

namespace extsum {

ParamId ParameterStore::add(const std::string& name, Tensor value) {
  if (index_.count(name)) {
    throw PreconditionError("duplicate parameter name '" + name + "'");
  }
  const Shape shape = value.shape();
  params_.push_back(Parameter{name, std::move(value), Tensor(shape),
                              Tensor(shape), Tensor(shape)});
  const ParamId pid = params_.size() - 1;
  index_.emplace(name, pid);
  return pid;
}

bool ParameterStore::contains(const std::string& name) const {
  return index_.count(name) != 0;
}

ParamId ParameterStore::id(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw IndexError("unknown parameter '" + name + "'");
  return it->second;
}

std::size_t ParameterStore::num_values() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) p.grad.fill(0.0);
}

void ParameterStore::scale_grad(double factor) {
  for (auto& p : params_)
    for (double& g : p.grad.data()) g *= factor;
}

double ParameterStore::grad_norm() const {
  double s = 0.0;
  for (const auto& p : params_) s += p.grad.squared_norm();
  return std::sqrt(s);
}

void ParameterStore::reset_accumulators() {
  for (auto& p : params_) {
    p.mean_sq_grad.fill(0.0);
    p.mean_sq_delta.fill(0.0);
  }
}

void ParameterStore::copy_values_from(const ParameterStore& other) {
  if (other.size() != size()) {
    throw DimensionError("parameter store layouts differ");
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name != other.params_[i].name ||
        !(params_[i].value.shape() == other.params_[i].value.shape())) {
      throw DimensionError("parameter '" + params_[i].name +
                           "' does not match '" + other.params_[i].name + "'");
    }
    params_[i].value = other.params_[i].value;
  }
}

double Rng::uniform(double lo, double hi) {
  // 53 random bits mapped to [0, 1); independent of the standard library's
  // distribution implementation.
  const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

std::size_t Rng::index(std::size_t n) {
  if (n == 0) throw PreconditionError("Rng::index on empty range");
  return static_cast<std::size_t>(uniform(0.0, 1.0) * static_cast<double>(n)) %
         n;
}

void fill_uniform(Tensor& t, double bound, Rng& rng) {
  for (double& x : t.data()) x = rng.uniform(-bound, bound);
}

void fill_glorot(Tensor& t, Rng& rng) {
  const double fan_out = static_cast<double>(t.rows());
  const double fan_in = static_cast<double>(t.cols());
  fill_uniform(t, std::sqrt(6.0 / (fan_in + fan_out)), rng);
}

}  // namespace extsum
