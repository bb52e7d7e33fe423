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
#include <vector>

#include "bhivae/data/dataset.hpp"

namespace bhivae::data {

struct MiniDspritesOptions {
  std::vector<FactorSpec> factors;
  int resolution = 32;
  std::uint64_t seed = 0;
  /// Side of the largest shape (scale 1) as a fraction of the canvas.
  double max_extent = 0.5;
  /// Shape centres are spaced evenly over [position_lo, position_hi] * resolution.
  double position_lo = 0.25;
  double position_hi = 0.75;
};

/// shape 3, scale 3, pos_x 4, pos_y 4 (144 images).
std::vector<FactorSpec> default_minidsprites_factors();

/// Scale values: n evenly spaced over [0.5, 0.9], or 0.9 when n = 1.
double scale_value(int index, int cardinality);
/// Centre coordinate in pixels for a position factor value.
double position_value(int index, int cardinality, const MiniDspritesOptions& options);
/// Rotation in radians; values cover a quarter turn.
double rotation_value(int index, int cardinality);

/// Whether the pixel (row, col) is foreground for a shape (0 square, 1 ellipse,
/// 2 cross) of half-side `half` centred at (cx, cy), tested at the pixel centre.
bool covers(int shape, double half, double cx, double cy, double angle, int row, int col);

/// Binary images over the full factorial grid of `options.factors`. Factors
/// without a spec default to a centred, largest, unrotated square. The seed
/// fixes the sample order.
Dataset gen_minidsprites(const MiniDspritesOptions& options);

}  // namespace bhivae::data
