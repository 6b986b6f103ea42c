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

#include <functional>
#include <string>

#include "extsum/autodiff.hpp"
#include "extsum/parameters.hpp"

namespace extsum {

// Builds a scalar loss on the given tape. Must be deterministic.
using LossBuilder = std::function<ad::Var(ad::Tape&)>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t entries_checked = 0;
};

// |analytic - numeric| / max(1e-8, |analytic| + |numeric|)
double gradient_relative_error(double analytic, double numeric);

// Compares backward gradients of every parameter entry against central
// differences (f(x + eps) - f(x - eps)) / 2 eps. Parameter values are
// restored on return; gradients in the store are left holding the
// analytic result.
GradCheckResult grad_check(const LossBuilder& f, ParameterStore& store,
                           double eps = 1e-5);

}  // namespace extsum
