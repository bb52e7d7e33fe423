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

#include "bhivae/data/batch.hpp"

#include <string>

#include "bhivae/errors.hpp"
#include "bhivae/util/random.hpp"

namespace bhivae::data {

BatchIterator::BatchIterator(const Dataset& dataset, std::int64_t batch_size, std::uint64_t seed)
    : dataset_(&dataset), batch_size_(batch_size), seed_(seed) {
  if (batch_size < 1 || batch_size > dataset.size()) {
    throw ValidationError("batch size " + std::to_string(batch_size) + " must lie in [1, " +
                          std::to_string(dataset.size()) + "]");
  }
  order_ = epoch_order(0);
}

std::vector<std::int64_t> BatchIterator::epoch_order(std::int64_t epoch) const {
  return util::random_permutation(dataset_->size(), util::derive_seed(seed_, static_cast<std::uint64_t>(epoch)));
}

Batch BatchIterator::next() {
  if (cursor_ + batch_size_ > static_cast<std::int64_t>(order_.size())) {
    ++epoch_;
    cursor_ = 0;
    order_ = epoch_order(epoch_);
  }
  Batch b;
  b.epoch = epoch_;
  b.rows.assign(order_.begin() + cursor_, order_.begin() + cursor_ + batch_size_);
  cursor_ += batch_size_;
  const auto& src = *dataset_;
  b.images = Array({batch_size_, src.pixels()});
  b.factors.resize(batch_size_, src.factors.values.cols());
  for (std::int64_t i = 0; i < batch_size_; ++i) {
    b.images.matrix().row(i) = src.images.matrix().row(b.rows[static_cast<std::size_t>(i)]);
    b.factors.row(i) = src.factors.values.row(b.rows[static_cast<std::size_t>(i)]);
  }
  return b;
}

}  // namespace bhivae::data
