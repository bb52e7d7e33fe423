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
#include "bhivae/runner/trainer.hpp"

namespace bhivae::runner {

/// Accuracy of classifier i on the mean s^i codes of `dataset`, per layer.
std::vector<double> s_accuracy(const LoadedModel& model, const data::Dataset& dataset);

struct ProbeOptions {
  int steps = 1500;
  double step_size = 1e-2;
  std::uint64_t seed = 0;
};

struct ProbeResult {
  std::vector<double> chance;       // 1 / cardinality per layer
  std::vector<double> trained;      // the projection learned during training
  std::vector<double> fresh;        // a projection refit after training
  std::vector<double> worst() const;  // elementwise max of the two
};

/// How well factor i can still be read from the carrier h^i (c^L for the
/// last layer) through the frozen classifier C_i. The fresh projection is fit
/// by full-batch Adam on the mean carriers of `train`; both projections are
/// scored on `heldout`. Supervised models only.
ProbeResult carrier_probe(const LoadedModel& model, const data::Dataset& train, const data::Dataset& heldout,
                          const ProbeOptions& options = {});

}  // namespace bhivae::runner
