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
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bhivae/data/dataset.hpp"
#include "bhivae/model/layout.hpp"
#include "bhivae/runner/trainer.hpp"

namespace bhivae::runner {

struct FactorReport {
  std::string name;
  double mig = 0.0;
  double block_mig = 0.0;
  double sap = 0.0;
};

/// Metric scores of one encoded dataset. Z-diff is a percentage in [0, 100];
/// the other scores lie in [0, 1]; layer_kl holds one nonnegative entry per
/// layer.
struct ScoreReport {
  double z_diff = 0.0;
  double sap = 0.0;
  double mig = 0.0;
  double block_mig = 0.0;
  std::vector<FactorReport> per_factor;
  std::vector<double> layer_kl;
  std::int64_t samples = 0;
  std::optional<std::vector<double>> s_accuracy;

  std::string to_json() const;
  void validate() const;
};

/// Metrics of precomputed codes. Rows are tiled whole when a factor class is
/// too rare for SAP; tiling leaves the plug-in estimates unchanged.
ScoreReport evaluate_latents(const Eigen::MatrixXd& latents, const model::BlockLayout& layout,
                             const metrics::FactorTable& table, const MetricOptions& options, double rho,
                             std::uint64_t seed = 0);

/// Gaussian-fit KL of each s^i block of `latents` to its correlated prior.
std::vector<double> layer_kl(const Eigen::MatrixXd& latents, const model::BlockLayout& layout, double rho);

/// Encodes `dataset` with the mean path and scores it. Supervised models also
/// report each layer classifier's accuracy on its factor.
ScoreReport evaluate(const LoadedModel& model, const data::Dataset& dataset, std::uint64_t seed = 0);

}  // namespace bhivae::runner
