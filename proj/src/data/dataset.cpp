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

#include "bhivae/data/dataset.hpp"

#include <string>

#include "bhivae/errors.hpp"

namespace bhivae::data {

std::string_view role_name(FactorRole role) {
  switch (role) {
    case FactorRole::kShape: return "shape";
    case FactorRole::kScale: return "scale";
    case FactorRole::kPosX: return "pos_x";
    case FactorRole::kPosY: return "pos_y";
    case FactorRole::kRotation: return "rotation";
    case FactorRole::kLabel: return "label";
  }
  return "label";
}

FactorRole parse_role(std::string_view name) {
  for (auto role : {FactorRole::kShape, FactorRole::kScale, FactorRole::kPosX, FactorRole::kPosY,
                    FactorRole::kRotation, FactorRole::kLabel}) {
    if (role_name(role) == name) return role;
  }
  throw ValidationError("unknown factor role '" + std::string(name) + "'");
}

std::optional<std::size_t> Dataset::factor_index(std::string_view name) const {
  for (std::size_t k = 0; k < factors.names.size(); ++k) {
    if (factors.names[k] == name) return k;
  }
  return std::nullopt;
}

std::vector<int> Dataset::labels(std::string_view name) const {
  const auto k = factor_index(name);
  if (!k) throw ValidationError("dataset has no factor named '" + std::string(name) + "'");
  return factors.column(*k);
}

Dataset Dataset::select(std::span<const std::int64_t> rows) const {
  Dataset out{Array({static_cast<std::int64_t>(rows.size()), pixels()}), height, width,
              {factors.names, factors.cardinalities, metrics::IndexMatrix(rows.size(), factors.values.cols())},
              roles};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= size()) throw ValidationError("row " + std::to_string(rows[i]) + " out of range");
    const auto r = static_cast<Eigen::Index>(i);
    out.images.matrix().row(r) = images.matrix().row(rows[i]);
    out.factors.values.row(r) = factors.values.row(rows[i]);
  }
  return out;
}

Dataset Dataset::slice(std::int64_t begin, std::int64_t end) const {
  if (begin < 0 || end < begin || end > size()) throw ValidationError("slice out of range");
  return {Array::from_matrix(images.matrix().middleRows(begin, end - begin)), height, width,
          factors.rows(begin, end), roles};
}

void Dataset::validate() const {
  if (images.rank() != 2) throw ValidationError("images must be a rank-2 array");
  if (height <= 0 || width <= 0 || images.cols() != pixels()) {
    throw ValidationError("image width " + std::to_string(images.cols()) + " does not match " +
                          std::to_string(height) + "x" + std::to_string(width));
  }
  factors.validate();
  if (factors.num_samples() != size()) throw ValidationError("factor rows do not match image count");
  if (roles.size() != factors.num_factors()) throw ValidationError("one role per factor is required");
  const auto& m = images.matrix();
  if (m.size() > 0 && (!m.allFinite() || m.minCoeff() < 0.0 || m.maxCoeff() > 1.0)) {
    throw ValidationError("image values must lie in [0, 1]");
  }
}

Dataset replicate(const Dataset& dataset, std::int64_t min_size) {
  if (dataset.size() == 0) throw ValidationError("cannot replicate an empty dataset");
  if (dataset.size() >= min_size) return dataset;
  const std::int64_t copies = (min_size + dataset.size() - 1) / dataset.size();
  std::vector<std::int64_t> rows;
  rows.reserve(static_cast<std::size_t>(copies * dataset.size()));
  for (std::int64_t c = 0; c < copies; ++c) {
    for (std::int64_t i = 0; i < dataset.size(); ++i) rows.push_back(i);
  }
  return dataset.select(rows);
}

}  // namespace bhivae::data
