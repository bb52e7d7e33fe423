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

#include "bhivae/runner/datasets.hpp"

#include <cmath>

#include "bhivae/data/idx.hpp"
#include "bhivae/data/minidsprites.hpp"
#include "bhivae/errors.hpp"
#include "bhivae/util/random.hpp"

namespace bhivae::runner {
namespace {

constexpr std::uint64_t kSplitStream = 17;

}  // namespace

data::Dataset load_dataset(const DatasetConfig& config) {
  switch (config.kind) {
    case DatasetKind::kMiniDsprites: {
      data::MiniDspritesOptions o;
      o.factors = config.factors.empty() ? data::default_minidsprites_factors() : config.factors;
      o.resolution = config.resolution;
      o.max_extent = config.max_extent;
      o.seed = config.seed;
      return data::gen_minidsprites(o);
    }
    case DatasetKind::kMnist:
      return data::load_idx(config.images, config.labels.empty()
                                               ? std::nullopt
                                               : std::optional<std::filesystem::path>(config.labels));
    case DatasetKind::kDirectory:
      return data::load_dataset_dir(config.path);
  }
  throw ValidationError("unknown dataset kind");
}

TrainingData load_training_data(const RunConfig& config) {
  TrainingData out;
  out.full = load_dataset(config.dataset);
  const auto& d = config.dataset;
  const auto pool = d.split == HoldoutSplit::kSamples ? data::replicate(out.full, d.min_samples) : out.full;
  const auto n = pool.size();
  const auto held = static_cast<std::int64_t>(std::floor(d.heldout_fraction * static_cast<double>(n)));
  if (n - held < 1) throw ValidationError("held-out split leaves no training samples");
  const auto perm = util::random_permutation(n, util::derive_seed(d.seed, kSplitStream));
  const std::vector<std::int64_t> held_rows(perm.begin(), perm.begin() + held);
  const std::vector<std::int64_t> train_rows(perm.begin() + held, perm.end());
  out.heldout = pool.select(held_rows);
  out.train = data::replicate(pool.select(train_rows), d.min_samples);
  return out;
}

std::vector<std::vector<int>> layer_labels(const data::Dataset& dataset, const RunConfig& config) {
  std::vector<std::vector<int>> out;
  for (const auto& name : config.layer_factors) out.push_back(dataset.labels(name));
  return out;
}

std::vector<std::int64_t> layer_classes(const data::Dataset& dataset, const RunConfig& config) {
  std::vector<std::int64_t> out;
  for (const auto& name : config.layer_factors) {
    const auto k = dataset.factor_index(name);
    if (!k) throw ValidationError("dataset has no factor named '" + name + "'");
    out.push_back(dataset.factors.cardinalities[*k]);
  }
  return out;
}

}  // namespace bhivae::runner
