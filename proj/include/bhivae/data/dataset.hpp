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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bhivae/metrics/factors.hpp"
#include "bhivae/ndgrad/array.hpp"

namespace bhivae::data {

using ndgrad::Array;

enum class FactorRole { kShape, kScale, kPosX, kPosY, kRotation, kLabel };

std::string_view role_name(FactorRole role);
FactorRole parse_role(std::string_view name);

struct FactorSpec {
  std::string name;
  int cardinality = 1;
  FactorRole role = FactorRole::kLabel;
};

/// Images flattened row-major to n x (height * width), values in [0, 1], with
/// one factor row per image.
struct Dataset {
  Array images;
  int height = 0;
  int width = 0;
  metrics::FactorTable factors;
  std::vector<FactorRole> roles;  // one per factor

  std::int64_t size() const { return images.rows(); }
  std::int64_t pixels() const { return static_cast<std::int64_t>(height) * width; }
  std::optional<std::size_t> factor_index(std::string_view name) const;
  /// Labels of the named factor; throws ValidationError naming it if absent.
  std::vector<int> labels(std::string_view name) const;
  Dataset select(std::span<const std::int64_t> rows) const;
  /// Rows [begin, end).
  Dataset slice(std::int64_t begin, std::int64_t end) const;
  void validate() const;
};

/// Repeats the rows of `dataset` in order until it holds at least `min_size`.
Dataset replicate(const Dataset& dataset, std::int64_t min_size);

}  // namespace bhivae::data
