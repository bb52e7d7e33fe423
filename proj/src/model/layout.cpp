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

#include "bhivae/model/layout.hpp"

#include <numeric>
#include <string>

#include "bhivae/errors.hpp"

namespace bhivae::model {

BlockLayout BlockLayout::with_default_carriers(std::vector<std::int64_t> s_dims, std::int64_t c_dim) {
  BlockLayout layout;
  layout.s_dims = std::move(s_dims);
  layout.c_dim = c_dim;
  std::int64_t below = c_dim;
  std::vector<std::int64_t> carriers;
  for (std::size_t i = layout.s_dims.size(); i-- > 1;) {
    below += layout.s_dims[i];
    carriers.insert(carriers.begin(), below);
  }
  layout.h_dims = std::move(carriers);
  return layout;
}

void BlockLayout::validate() const {
  if (s_dims.empty()) throw ValidationError("layout needs at least one layer");
  if (h_dims.size() + 1 != s_dims.size()) {
    throw ValidationError("layout with " + std::to_string(s_dims.size()) + " layers needs " +
                          std::to_string(s_dims.size() - 1) + " carrier widths, got " + std::to_string(h_dims.size()));
  }
  for (auto d : s_dims) {
    if (d <= 0) throw ValidationError("feature block widths must be positive");
  }
  for (auto d : h_dims) {
    if (d <= 0) throw ValidationError("carrier widths must be positive");
  }
  if (c_dim <= 0) throw ValidationError("residual width must be positive");
}

std::int64_t BlockLayout::latent_dim() const {
  return std::accumulate(s_dims.begin(), s_dims.end(), std::int64_t{0}) + c_dim;
}

std::int64_t BlockLayout::carrier_width(std::size_t layer) const {
  if (layer + 1 == s_dims.size()) return c_dim;
  return h_dims.at(layer);
}

std::int64_t BlockLayout::block_offset(std::size_t block) const {
  if (block > s_dims.size()) throw ValidationError("block index " + std::to_string(block) + " out of range");
  return std::accumulate(s_dims.begin(), s_dims.begin() + static_cast<std::ptrdiff_t>(block), std::int64_t{0});
}

std::pair<std::int64_t, std::int64_t> BlockLayout::unit_columns(std::size_t unit) const {
  if (unit >= traversal_units()) {
    throw ValidationError("traversal unit " + std::to_string(unit) + " outside [0," +
                          std::to_string(traversal_units()) + ")");
  }
  if (unit < num_layers()) {
    const auto begin = block_offset(unit);
    return {begin, begin + s_dims[unit]};
  }
  const auto begin = block_offset(num_layers()) + 2 * static_cast<std::int64_t>(unit - num_layers());
  return {begin, std::min(begin + 2, latent_dim())};
}

}  // namespace bhivae::model
