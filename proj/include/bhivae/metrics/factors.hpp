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
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace bhivae::metrics {

using IndexMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Ground-truth factor values, one row per sample.
struct FactorTable {
  std::vector<std::string> names;
  std::vector<int> cardinalities;
  IndexMatrix values;  // samples x factors

  std::int64_t num_samples() const { return values.rows(); }
  std::size_t num_factors() const { return names.size(); }
  std::vector<int> column(std::size_t factor) const;
  /// Rows [begin, end) as a new table.
  FactorTable rows(std::int64_t begin, std::int64_t end) const;
  void validate() const;
};

/// Empirical entropy in nats of integer labels in [0, cardinality).
double label_entropy(std::span<const int> labels, int cardinality);

}  // namespace bhivae::metrics
