// Copyright 2026 The BHiVAE Authors
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

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace bhivae::ndgrad {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Shape = std::vector<std::int64_t>;

std::string to_string(const Shape& shape);
std::int64_t element_count(const Shape& shape);

/// Dense row-major array of 64-bit reals.
///
/// The payload is kept as a 2-D row-major matrix view: rank 0 is 1x1, rank 1
/// of length n is 1xn, and higher ranks fold every leading axis into rows so
/// the last axis is always the column axis.
class Array {
 public:
  Array();
  explicit Array(Shape shape);
  Array(Shape shape, std::span<const double> values);
  Array(Shape shape, std::initializer_list<double> values);

  static Array scalar(double value);
  static Array vector(std::span<const double> values);
  static Array from_matrix(Matrix m);
  static Array filled(Shape shape, double value);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::int64_t size() const { return data_.size(); }
  std::int64_t rows() const { return data_.rows(); }
  std::int64_t cols() const { return data_.cols(); }

  const Matrix& matrix() const { return data_; }
  Matrix& matrix() { return data_; }

  std::span<const double> values() const { return {data_.data(), static_cast<std::size_t>(data_.size())}; }
  std::span<double> values() { return {data_.data(), static_cast<std::size_t>(data_.size())}; }

  double item() const;
  bool all_finite() const;

  /// Bitwise equality of shape and payload.
  friend bool operator==(const Array& a, const Array& b);

 private:
  Shape shape_;
  Matrix data_;
};

/// Rows x cols of the matrix view for a given shape.
std::pair<std::int64_t, std::int64_t> matrix_dims(const Shape& shape);

}  // namespace bhivae::ndgrad
