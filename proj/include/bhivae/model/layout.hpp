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
#include <utility>
#include <vector>

namespace bhivae::model {

/// Per-layer latent widths. Layer i emits z^i = (s^i; h^i); the last layer
/// emits (s^L; c^L) and c^L is the residual block of the representation.
struct BlockLayout {
  std::vector<std::int64_t> s_dims;
  std::vector<std::int64_t> h_dims;  // L - 1 carrier widths
  std::int64_t c_dim = 0;

  /// Carrier widths default to everything the deeper layers still have to
  /// emit: h^i = s^{i+1} + ... + s^L + c^L.
  static BlockLayout with_default_carriers(std::vector<std::int64_t> s_dims, std::int64_t c_dim);

  void validate() const;

  std::size_t num_layers() const { return s_dims.size(); }
  /// d(z) = sum of s_dims + c_dim.
  std::int64_t latent_dim() const;
  /// h^i for i < L, c^L for the last layer.
  std::int64_t carrier_width(std::size_t layer) const;
  std::int64_t layer_width(std::size_t layer) const { return s_dims.at(layer) + carrier_width(layer); }
  /// Column offset of s^i inside the assembled z; index L gives the offset of c^L.
  std::int64_t block_offset(std::size_t block) const;

  /// Traversal units: the L feature blocks followed by the residual block cut
  /// into 2-wide groups (the last group is 1-wide when c_dim is odd).
  std::size_t residual_groups() const { return static_cast<std::size_t>((c_dim + 1) / 2); }
  std::size_t traversal_units() const { return num_layers() + residual_groups(); }
  /// [begin, end) columns of a traversal unit inside z.
  std::pair<std::int64_t, std::int64_t> unit_columns(std::size_t unit) const;

  friend bool operator==(const BlockLayout&, const BlockLayout&) = default;
};

}  // namespace bhivae::model
