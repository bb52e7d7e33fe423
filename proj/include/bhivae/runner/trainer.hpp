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
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "bhivae/model/architecture.hpp"
#include "bhivae/runner/checkpoint.hpp"
#include "bhivae/runner/datasets.hpp"

namespace bhivae::runner {

/// Every logged loss component of one step, in a fixed order, plus the total
/// the optimizer minimized.
struct TraceRow {
  std::int64_t step = 0;
  std::vector<std::pair<std::string, double>> terms;
  double total = 0.0;

  double term(const std::string& name) const;
};

/// One JSON object per line; doubles keep full precision.
std::string trace_line(const TraceRow& row);

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<TraceRow> trace;
};

using StepHook = std::function<void(const TraceRow&)>;

/// Adam training of the config's mode. Supervised steps minimize the class
/// bounds, erasure and weighted reconstruction over encoder, decoder and
/// classifiers, and the probe loss over the projections. Unsupervised steps
/// minimize the adversarial KL, TC and weighted reconstruction over encoder
/// and decoder, and the three-way cross-entropy over the discriminators,
/// both from the same forward pass. A non-finite value aborts with the step.
TrainResult train(const RunConfig& config, const TrainingData& data, const StepHook& hook = {});
TrainResult train(const RunConfig& config, const StepHook& hook = {});

/// Writes checkpoint.bin and trace.jsonl under `dir`.
void write_run(const TrainResult& result, const std::filesystem::path& dir);

/// A checkpoint's network: the architecture is recovered from parameter
/// shapes, so no dataset is needed.
struct LoadedModel {
  RunConfig config;
  model::Architecture arch;
  nn::ParamStore params;
};

LoadedModel load_model(const Checkpoint& checkpoint);

/// Deterministic (mean) codes of every row, in chunks.
Eigen::MatrixXd encode_means(const LoadedModel& model, const ndgrad::Array& images);

}  // namespace bhivae::runner
