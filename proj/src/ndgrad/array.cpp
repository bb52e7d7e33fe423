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

#include "bhivae/ndgrad/array.hpp"

#include <algorithm>
#include <cstring>
#include <sstream>

#include "bhivae/errors.hpp"

namespace bhivae::ndgrad {

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::int64_t element_count(const Shape& shape) {
  std::int64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::pair<std::int64_t, std::int64_t> matrix_dims(const Shape& shape) {
  for (auto d : shape) {
    if (d <= 0) throw ValidationError("array shape " + to_string(shape) + " has a non-positive extent");
  }
  if (shape.empty()) return {1, 1};
  const std::int64_t cols = shape.back();
  return {element_count(shape) / cols, cols};
}

Array::Array() : Array(Shape{}) {}

Array::Array(Shape shape) : shape_(std::move(shape)) {
  auto [r, c] = matrix_dims(shape_);
  data_ = Matrix::Zero(r, c);
}

Array::Array(Shape shape, std::span<const double> values) : Array(std::move(shape)) {
  if (static_cast<std::int64_t>(values.size()) != data_.size()) {
    throw ValidationError("array shape " + to_string(shape_) + " needs " + std::to_string(data_.size()) +
                          " values, got " + std::to_string(values.size()));
  }
  std::copy(values.begin(), values.end(), data_.data());
}

Array::Array(Shape shape, std::initializer_list<double> values)
    : Array(std::move(shape), std::span<const double>(values.begin(), values.size())) {}

Array Array::scalar(double value) {
  Array a;
  a.data_(0, 0) = value;
  return a;
}

Array Array::vector(std::span<const double> values) {
  return Array(Shape{static_cast<std::int64_t>(values.size())}, values);
}

Array Array::from_matrix(Matrix m) {
  Array a(Shape{m.rows(), m.cols()});
  a.data_ = std::move(m);
  return a;
}

Array Array::filled(Shape shape, double value) {
  Array a(std::move(shape));
  a.data_.setConstant(value);
  return a;
}

double Array::item() const {
  if (data_.size() != 1) throw ContractError("item() on array of shape " + to_string(shape_));
  return data_(0, 0);
}

bool Array::all_finite() const { return data_.allFinite(); }

bool operator==(const Array& a, const Array& b) {
  if (a.shape_ != b.shape_) return false;
  return std::memcmp(a.data_.data(), b.data_.data(), sizeof(double) * a.data_.size()) == 0;
}

}  // namespace bhivae::ndgrad
