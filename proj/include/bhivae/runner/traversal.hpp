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
#include <string>

#include "bhivae/data/dataset.hpp"
#include "bhivae/runner/trainer.hpp"

namespace bhivae::runner {

/// Binary PGM (P5, maxval 255) of traversal tiles: one row per traversal unit
/// (feature blocks, then residual pairs), one column per t in
/// linspace(-3, 3, steps), each tile the decoded image of the sample's mean
/// code with that unit set to t.
std::string traversal_pgm(const LoadedModel& model, const data::Dataset& dataset, std::int64_t sample_index,
                          int steps);

void write_file(const std::filesystem::path& path, const std::string& bytes);

}  // namespace bhivae::runner
