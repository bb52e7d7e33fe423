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

#include <string>

#include "bhivae/runner/config.hpp"

namespace bhivae::runner {

struct AblationReport {
  std::string factor;
  double block_accuracy = 0.0;   // s width 2
  double single_accuracy = 0.0;  // s width 1
  std::int64_t steps = 0;

  std::string to_json() const;
};

/// Trains two one-layer supervised models on `factor` that differ only in the
/// width of s (2 vs 1) and reports held-out classifier accuracy of each.
AblationReport run_ablation(const RunConfig& base, const std::string& factor);

}  // namespace bhivae::runner
