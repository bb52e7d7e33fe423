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

#include "bhivae/metrics/factors.hpp"

#include <cmath>

#include "bhivae/errors.hpp"

namespace bhivae::metrics {

std::vector<int> FactorTable::column(std::size_t factor) const {
  if (factor >= num_factors()) throw ValidationError("factor index " + std::to_string(factor) + " out of range");
  std::vector<int> out(static_cast<std::size_t>(values.rows()));
  for (Eigen::Index i = 0; i < values.rows(); ++i) out[static_cast<std::size_t>(i)] = values(i, static_cast<Eigen::Index>(factor));
  return out;
}

FactorTable FactorTable::rows(std::int64_t begin, std::int64_t end) const {
  if (begin < 0 || end < begin || end > num_samples()) throw ValidationError("row range out of bounds");
  return {names, cardinalities, values.middleRows(begin, end - begin)};
}

void FactorTable::validate() const {
  if (names.size() != cardinalities.size()) throw ValidationError("factor names and cardinalities differ in length");
  if (static_cast<std::size_t>(values.cols()) != names.size()) {
    throw ValidationError("factor table has " + std::to_string(values.cols()) + " columns for " +
                          std::to_string(names.size()) + " factors");
  }
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (cardinalities[k] < 1) throw ValidationError("factor '" + names[k] + "' needs a positive cardinality");
    const auto col = values.col(static_cast<Eigen::Index>(k));
    if (col.size() > 0 && (col.minCoeff() < 0 || col.maxCoeff() >= cardinalities[k])) {
      throw ValidationError("factor '" + names[k] + "' has values outside [0," + std::to_string(cardinalities[k]) + ")");
    }
  }
}

double label_entropy(std::span<const int> labels, int cardinality) {
  if (labels.empty()) throw ValidationError("entropy of an empty label set");
  std::vector<double> counts(static_cast<std::size_t>(cardinality), 0.0);
  for (int l : labels) {
    if (l < 0 || l >= cardinality) throw ValidationError("label " + std::to_string(l) + " out of range");
    counts[static_cast<std::size_t>(l)] += 1.0;
  }
  const double n = static_cast<double>(labels.size());
  double h = 0.0;
  for (double c : counts) {
    if (c > 0.0) h -= (c / n) * std::log(c / n);
  }
  return h;
}

}  // namespace bhivae::metrics
