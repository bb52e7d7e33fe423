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

#include "bhivae/data/minidsprites.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "bhivae/errors.hpp"
#include "bhivae/util/random.hpp"

namespace bhivae::data {
namespace {

constexpr std::int64_t kMaxGrid = 1'000'000;
constexpr std::array<const char*, 3> kShapeNames{"square", "ellipse", "cross"};

double linspace(int index, int count, double lo, double hi) {
  if (count == 1) return hi;
  return lo + (hi - lo) * index / (count - 1);
}

}  // namespace

std::vector<FactorSpec> default_minidsprites_factors() {
  return {{"shape", 3, FactorRole::kShape},
          {"scale", 3, FactorRole::kScale},
          {"pos_x", 4, FactorRole::kPosX},
          {"pos_y", 4, FactorRole::kPosY}};
}

double scale_value(int index, int cardinality) { return linspace(index, cardinality, 0.5, 0.9); }

double position_value(int index, int cardinality, const MiniDspritesOptions& options) {
  const double r = options.resolution;
  if (cardinality == 1) return 0.5 * r;
  return linspace(index, cardinality, options.position_lo * r, options.position_hi * r);
}

double rotation_value(int index, int cardinality) {
  return 0.5 * std::numbers::pi * index / cardinality;
}

bool covers(int shape, double half, double cx, double cy, double angle, int row, int col) {
  const double px = col + 0.5 - cx;
  const double py = row + 0.5 - cy;
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const double dx = std::abs(c * px + s * py);
  const double dy = std::abs(-s * px + c * py);
  switch (shape) {
    case 0:
      return dx <= half && dy <= half;
    case 1: {
      const double b = 0.6 * half;
      return (dx * dx) / (half * half) + (dy * dy) / (b * b) <= 1.0;
    }
    case 2: {
      const double arm = half / 3.0;
      return (dx <= half && dy <= arm) || (dy <= half && dx <= arm);
    }
    default:
      throw ValidationError("unknown shape index " + std::to_string(shape));
  }
}

Dataset gen_minidsprites(const MiniDspritesOptions& options) {
  if (options.resolution != 32 && options.resolution != 64) {
    throw ValidationError("resolution must be 32 or 64, got " + std::to_string(options.resolution));
  }
  if (!(options.max_extent > 0.0) || !(options.position_lo <= options.position_hi)) {
    throw ValidationError("max_extent must be positive and position_lo <= position_hi");
  }
  if (options.factors.empty()) throw ValidationError("mini-dSprites needs at least one factor");
  std::array<int, 5> slot{-1, -1, -1, -1, -1};
  std::int64_t grid = 1;
  for (std::size_t k = 0; k < options.factors.size(); ++k) {
    const auto& f = options.factors[k];
    if (f.cardinality < 1) throw ValidationError("factor '" + f.name + "' needs cardinality >= 1");
    if (f.role == FactorRole::kLabel) throw ValidationError("factor '" + f.name + "' has no renderer role");
    auto& s = slot[static_cast<std::size_t>(f.role)];
    if (s >= 0) throw ValidationError("role '" + std::string(role_name(f.role)) + "' is used twice");
    s = static_cast<int>(k);
    if (f.role == FactorRole::kShape && f.cardinality > 3) {
      throw ValidationError("only 3 shapes are available, factor '" + f.name + "' asks for " +
                            std::to_string(f.cardinality));
    }
    grid *= f.cardinality;
    if (grid > kMaxGrid) throw ValidationError("factorial grid exceeds 1000000 combinations");
  }

  const int r = options.resolution;
  const auto k = static_cast<Eigen::Index>(options.factors.size());
  Dataset out;
  out.height = r;
  out.width = r;
  out.images = Array({grid, static_cast<std::int64_t>(r) * r});
  for (const auto& f : options.factors) {
    out.factors.names.push_back(f.name);
    out.factors.cardinalities.push_back(f.cardinality);
    out.roles.push_back(f.role);
  }
  out.factors.values.resize(grid, k);

  const auto order = util::random_permutation(grid, options.seed);
  std::vector<int> value(options.factors.size(), 0);
  for (std::int64_t combo = 0; combo < grid; ++combo) {
    // Last factor varies fastest.
    std::int64_t code = combo;
    for (std::size_t j = options.factors.size(); j-- > 0;) {
      value[j] = static_cast<int>(code % options.factors[j].cardinality);
      code /= options.factors[j].cardinality;
    }
    auto pick = [&](FactorRole role, int fallback) {
      const int s = slot[static_cast<std::size_t>(role)];
      return s < 0 ? std::pair{fallback, 1} : std::pair{value[static_cast<std::size_t>(s)], options.factors[static_cast<std::size_t>(s)].cardinality};
    };
    const int shape = pick(FactorRole::kShape, 0).first;
    const auto [si, sn] = pick(FactorRole::kScale, 0);
    const auto [xi, xn] = pick(FactorRole::kPosX, 0);
    const auto [yi, yn] = pick(FactorRole::kPosY, 0);
    const auto [ri, rn] = pick(FactorRole::kRotation, 0);
    const double half = 0.5 * scale_value(si, sn) * options.max_extent * r;
    const double cx = position_value(xi, xn, options);
    const double cy = position_value(yi, yn, options);
    const double angle = slot[static_cast<std::size_t>(FactorRole::kRotation)] < 0 ? 0.0 : rotation_value(ri, rn);
    const double reach = angle == 0.0 ? half : half * std::numbers::sqrt2;
    if (cx - reach < 0.0 || cx + reach > r || cy - reach < 0.0 || cy + reach > r) {
      std::string combo_name;
      for (std::size_t j = 0; j < options.factors.size(); ++j) {
        combo_name += (j ? ", " : "") + options.factors[j].name + "=" + std::to_string(value[j]);
      }
      throw GenerationError(std::string(kShapeNames[static_cast<std::size_t>(shape)]) + " at (" + combo_name +
                            ") leaves the " + std::to_string(r) + "x" + std::to_string(r) + " canvas");
    }
    const auto row = static_cast<Eigen::Index>(order[static_cast<std::size_t>(combo)]);
    auto pixels = out.images.matrix().row(row);
    for (int y = 0; y < r; ++y) {
      for (int x = 0; x < r; ++x) {
        if (covers(shape, half, cx, cy, angle, y, x)) pixels(y * r + x) = 1.0;
      }
    }
    for (Eigen::Index j = 0; j < k; ++j) out.factors.values(row, j) = value[static_cast<std::size_t>(j)];
  }
  return out;
}

}  // namespace bhivae::data
