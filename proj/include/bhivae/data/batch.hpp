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

struct Batch {
  Array images;
  metrics::IndexMatrix factors;
  std::vector<std::int64_t> rows;
  std::int64_t epoch = 0;
};

/// Endless sequence of full batches. Each epoch visits a fresh permutation
/// fixed by (seed, epoch); the short tail of every epoch is dropped.
class BatchIterator {
 public:
  BatchIterator(const Dataset& dataset, std::int64_t batch_size, std::uint64_t seed);

  Batch next();
  std::int64_t batches_per_epoch() const { return dataset_->size() / batch_size_; }
  /// Row order of an epoch; the last size % batch_size rows are dropped.
  std::vector<std::int64_t> epoch_order(std::int64_t epoch) const;

 private:
  const Dataset* dataset_;
  std::int64_t batch_size_;
  std::uint64_t seed_;
  std::int64_t epoch_ = 0;
  std::int64_t cursor_ = 0;
  std::vector<std::int64_t> order_;
};

}  // namespace bhivae::data
