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
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace extsum {

// Shape of a dense tensor. Only vectors (rank 1) and matrices (rank 2) are
// needed by the model, so the rank is capped at 2. Every dimension is
// positive except that a vector may be empty.
class Shape {
 public:
  Shape() = default;
  static Shape vector(std::size_t n) { return Shape(1, n, 1); }
  static Shape matrix(std::size_t rows, std::size_t cols) {
    return Shape(2, rows, cols);
  }

  std::size_t rank() const { return rank_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return rows_ * cols_; }
  std::vector<std::size_t> dims() const;
  std::string str() const;

  friend bool operator==(const Shape&, const Shape&) = default;

 private:
  Shape(std::size_t rank, std::size_t rows, std::size_t cols)
      : rank_(rank), rows_(rows), cols_(cols) {}

  std::size_t rank_ = 1;
  std::size_t rows_ = 0;
  std::size_t cols_ = 1;
};

// Dense row-major double tensor.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0)
      : shape_(shape), data_(shape.size(), fill) {}
  Tensor(Shape shape, std::vector<double> data);

  static Tensor vector(std::initializer_list<double> values);
  static Tensor vector(std::vector<double> values);
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor scalar(double v) { return vector({v}); }
  static Tensor from_dims(const std::vector<std::size_t>& dims,
                          std::vector<double> data);

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  std::size_t rows() const { return shape_.rows(); }
  std::size_t cols() const { return shape_.cols(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const {
    return data_[r * cols() + c];
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols(), cols()};
  }
  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols(), cols()};
  }
  const std::vector<double>& values() const { return data_; }

  void fill(double v);
  // this += scale * other; shapes must match.
  void axpy(double scale, const Tensor& other);
  double squared_norm() const;
  bool all_finite() const;

 private:
  Shape shape_;
  std::vector<double> data_;
};

// Plain (non-differentiable) kernels shared by the tape and the tests.
Tensor matmul(const Tensor& a, const Tensor& b);

}  // namespace extsum
