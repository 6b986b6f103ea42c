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

#include "extsum/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace extsum {

double gradient_relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) /
         std::max(1e-8, std::abs(analytic) + std::abs(numeric));
}

GradCheckResult grad_check(const LossBuilder& f, ParameterStore& store,
                           double eps) {
  auto evaluate = [&]() {
    ad::Tape tape(&store);
    return f(tape).scalar();
  };

  store.zero_grad();
  {
    ad::Tape tape(&store);
    tape.backward(f(tape));
  }

  GradCheckResult result;
  for (Parameter& p : store) {
    auto values = p.value.data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + eps;
      const double up = evaluate();
      values[i] = saved - eps;
      const double down = evaluate();
      values[i] = saved;

      const double numeric = (up - down) / (2.0 * eps);
      const double analytic = p.grad[i];
      const double err = gradient_relative_error(analytic, numeric);
      ++result.entries_checked;
      if (err > result.max_relative_error || result.entries_checked == 1) {
        result.max_relative_error = err;
        result.worst_parameter = p.name;
        result.worst_index = i;
        result.worst_analytic = analytic;
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace extsum
