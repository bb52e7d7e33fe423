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
#include <functional>
#include <random>
#include <utility>

#include <Eigen/Core>

#include "bhivae/metrics/factors.hpp"
#include "bhivae/ndgrad/array.hpp"

namespace bhivae::metrics {

struct ZDiffConfig {
  int n_votes = 600;
  int pairs_per_vote = 64;
  std::int64_t reference_samples = 2000;  // for the per-dimension std
  std::uint64_t seed = 0;
};

/// Observation source for Z-diff. `sample_pairs(k, n, rng)` returns two
/// batches of n observations whose rows agree on factor k.
struct ZDiffSource {
  std::size_t num_factors = 0;
  std::function<std::pair<ndgrad::Array, ndgrad::Array>(std::size_t, std::int64_t, std::mt19937_64&)> sample_pairs;
  std::function<ndgrad::Array(std::int64_t, std::mt19937_64&)> sample;
};

using LatentEncoder = std::function<Eigen::MatrixXd(const ndgrad::Array&)>;

/// Held-out accuracy (percent) of a majority-vote classifier that maps the
/// dimension with the smallest standardized mean |z_a - z_b| to the fixed
/// factor. The first half of the votes trains the classifier, the second half
/// scores it. Dimensions with zero spread are ignored.
double z_diff(const LatentEncoder& encoder, const ZDiffSource& source, const ZDiffConfig& config);

/// Z-diff over precomputed latents: pairs are drawn from rows that share the
/// fixed factor's value. Factors with a single observed value are skipped.
double z_diff(const Eigen::MatrixXd& latents, const FactorTable& table, const ZDiffConfig& config);

}  // namespace bhivae::metrics
