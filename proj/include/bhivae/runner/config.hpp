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
#include <optional>
#include <string>
#include <vector>

#include "bhivae/data/dataset.hpp"
#include "bhivae/model/architecture.hpp"
#include "bhivae/objectives/losses.hpp"

namespace bhivae::runner {

struct OptimizerConfig {
  double step_size = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Step size of the adversaries: the carrier projections (supervised) and
  /// the discriminators (unsupervised).
  double adversary_step_size = 1e-3;
  /// Supervised mode: carrier projection updates per training step.
  int projection_steps = 5;
};

enum class DatasetKind { kMiniDsprites, kMnist, kDirectory };

/// kSamples holds out rows of the replicated dataset, so held-out images may
/// also occur in training; kCombos holds out whole distinct samples.
enum class HoldoutSplit { kSamples, kCombos };

struct DatasetConfig {
  DatasetKind kind = DatasetKind::kMiniDsprites;
  // Mini-dSprites.
  int resolution = 32;
  std::vector<data::FactorSpec> factors;  // empty: shape 3, scale 3, pos_x 4, pos_y 4
  double max_extent = 0.5;
  std::uint64_t seed = 0;
  // MNIST IDX files, or a directory written by gen-data.
  std::string images;
  std::string labels;
  std::string path;
  /// Training rows are repeated until there are at least this many.
  std::int64_t min_samples = 5000;
  /// Share of samples held out from training.
  double heldout_fraction = 0.25;
  HoldoutSplit split = HoldoutSplit::kSamples;
};

struct MetricOptions {
  int bins = 20;
  int votes = 600;
  int pairs_per_vote = 64;
};

/// Optional overrides of the network widths.
struct ArchitectureConfig {
  std::optional<std::vector<std::int64_t>> encoder_hidden;
  std::optional<std::vector<std::int64_t>> part_hidden;
  std::optional<std::int64_t> merge_width;
  std::optional<std::vector<std::int64_t>> merge_hidden;
  std::optional<std::vector<std::int64_t>> classifier_hidden;
  std::optional<std::vector<std::int64_t>> discriminator_hidden;
};

struct RunConfig {
  model::Mode mode = model::Mode::kUnsupervised;
  model::BlockLayout layout;
  objectives::LossWeights weights;
  double rho = 0.5;
  OptimizerConfig optimizer;
  std::int64_t batch_size = 128;
  std::int64_t total_steps = 5000;
  std::uint64_t seed = 0;
  DatasetConfig dataset;
  /// Supervised mode: the factor each layer classifies, first layer first.
  std::vector<std::string> layer_factors{"scale", "pos_x", "shape"};
  MetricOptions metrics;
  ArchitectureConfig architecture;
  /// Where train writes checkpoint.bin and trace.jsonl.
  std::string out_dir = "run";

  void validate() const;
};

/// Strict JSON parsing: unknown keys, wrong types and invariant violations
/// throw ConfigError naming the key. "mode" and "layout" are required.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config(const std::filesystem::path& path);
/// A bare "dataset" object, with the same keys and checks as in a config.
DatasetConfig parse_dataset_config_text(const std::string& text);
/// Canonical JSON with every field spelled out; parse_config_text inverts it.
std::string config_to_json(const RunConfig& config);

/// Network shapes for a config over data of `data_dim` pixels; `classes` lists
/// the cardinality of each layer's factor in supervised mode.
model::Architecture make_architecture(const RunConfig& config, std::int64_t data_dim,
                                      std::vector<std::int64_t> classes);

}  // namespace bhivae::runner
