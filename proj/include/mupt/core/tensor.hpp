// Copyright 2026 The mupt Authors
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

namespace mupt {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_str(const Shape& shape);

/// Dense row-major tensor of 64-bit floats.
///
/// Rank 0 is a scalar with one element. The class is a plain value type:
/// copies are deep and all elements live in one contiguous buffer.
class Tensor {
 public:
  Tensor() : shape_{}, data_(1, 0.0) {}
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double v) { return Tensor(Shape{}, std::vector<double>{v}); }
  static Tensor vector(std::initializer_list<double> values);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> values);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const { return data_.size(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }
  double& at(std::size_t b, std::size_t i, std::size_t j) {
    return data_[(b * shape_[1] + i) * shape_[2] + j];
  }
  double at(std::size_t b, std::size_t i, std::size_t j) const {
    return data_[(b * shape_[1] + i) * shape_[2] + j];
  }

  double item() const;
  void fill(double v);
  bool all_finite() const;
  // Throws NumericError naming `what` if any element is NaN/Inf.
  void require_finite(const std::string& what) const;

  Tensor reshaped(Shape shape) const;

 private:
  Shape shape_;
  std::vector<double> data_;
};

// Bitwise comparison of shape and payload (distinguishes -0.0 and NaN payloads).
bool bit_equal(const Tensor& a, const Tensor& b);
double max_abs_diff(const Tensor& a, const Tensor& b);
double mean_abs(const Tensor& t);
double variance(const Tensor& t);

}  // namespace mupt
