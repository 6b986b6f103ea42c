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

#include "extsum/tensor.hpp"

#include <cmath>

#include "extsum/errors.hpp"

namespace extsum {

std::vector<std::size_t> Shape::dims() const {
  if (rank_ == 1) return {rows_};
  return {rows_, cols_};
}

std::string Shape::str() const {
  if (rank_ == 1) return "[" + std::to_string(rows_) + "]";
  return "[" + std::to_string(rows_) + "x" + std::to_string(cols_) + "]";
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(shape), data_(std::move(data)) {
  if (data_.size() != shape_.size()) {
    throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_.str());
  }
}

Tensor Tensor::vector(std::initializer_list<double> values) {
  return Tensor(Shape::vector(values.size()), std::vector<double>(values));
}

Tensor Tensor::vector(std::vector<double> values) {
  const auto n = values.size();
  return Tensor(Shape::vector(n), std::move(values));
}

Tensor Tensor::matrix(
    std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("ragged matrix literal");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor(Shape::matrix(r, c), std::move(data));
}

Tensor Tensor::from_dims(const std::vector<std::size_t>& dims,
                         std::vector<double> data) {
  if (dims.size() == 1) return Tensor(Shape::vector(dims[0]), std::move(data));
  if (dims.size() == 2)
    return Tensor(Shape::matrix(dims[0], dims[1]), std::move(data));
  throw DimensionError("only rank 1 and rank 2 tensors are supported, got rank " +
                       std::to_string(dims.size()));
}

void Tensor::fill(double v) {
  for (double& x : data_) x = v;
}

void Tensor::axpy(double scale, const Tensor& other) {
  if (other.size() != size()) {
    throw DimensionError("axpy shape mismatch " + shape_.str() + " vs " +
                         other.shape().str());
  }
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += scale * other[i];
}

double Tensor::squared_norm() const {
  double s = 0.0;
  for (double x : data_) s += x * x;
  return s;
}

bool Tensor::all_finite() const {
  for (double x : data_)
    if (!std::isfinite(x)) return false;
  return true;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  // A vector on the right is treated as a k x 1 column.
  const std::size_t m = a.shape().rank() == 1 ? 1 : a.rows();
  const std::size_t k = a.shape().rank() == 1 ? a.rows() : a.cols();
  const std::size_t kb = b.rows();
  const std::size_t n = b.shape().rank() == 1 ? 1 : b.cols();
  if (k != kb) {
    throw DimensionError("matmul inner dimensions disagree: " + a.shape().str() +
                         " x " + b.shape().str());
  }
  Tensor out(b.shape().rank() == 1 ? Shape::vector(m) : Shape::matrix(m, n));
  const auto A = a.data();
  const auto B = b.data();
  auto C = out.data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = A[i * k + p];
      if (aip == 0.0) continue;
      const double* brow = B.data() + p * n;
      double* crow = C.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
    }
  }
  return out;
}

}  // namespace extsum
