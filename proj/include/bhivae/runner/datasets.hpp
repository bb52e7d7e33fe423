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

#include "bhivae/data/dataset.hpp"
#include "bhivae/runner/config.hpp"

namespace bhivae::runner {

/// A config's dataset: `full` holds the distinct samples, `train` and
/// `heldout` partition either the replicated rows or the distinct samples
/// (then only the training part is replicated), per dataset.split.
struct TrainingData {
  data::Dataset full;
  data::Dataset train;
  data::Dataset heldout;
};

data::Dataset load_dataset(const DatasetConfig& config);
TrainingData load_training_data(const RunConfig& config);

/// Labels of each layer's factor; throws ValidationError naming a missing factor.
std::vector<std::vector<int>> layer_labels(const data::Dataset& dataset, const RunConfig& config);
/// Cardinality of each layer's factor.
std::vector<std::int64_t> layer_classes(const data::Dataset& dataset, const RunConfig& config);

}  // namespace bhivae::runner
