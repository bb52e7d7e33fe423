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

#include "bhivae/runner/ablation.hpp"

#include <json.hpp>

#include "bhivae/runner/probe.hpp"
#include "bhivae/runner/trainer.hpp"

namespace bhivae::runner {
namespace {

double heldout_accuracy(const RunConfig& config, const TrainingData& data) {
  const auto result = train(config, data);
  const auto model = load_model(result.checkpoint);
  return s_accuracy(model, data.heldout).front();
}

}  // namespace

std::string AblationReport::to_json() const {
  nlohmann::ordered_json j;
  j["factor"] = factor;
  j["steps"] = steps;
  j["block"] = {{"s_width", 2}, {"accuracy", block_accuracy}};
  j["single"] = {{"s_width", 1}, {"accuracy", single_accuracy}};
  j["block_better"] = block_accuracy > single_accuracy;
  return j.dump(2);
}

AblationReport run_ablation(const RunConfig& base, const std::string& factor) {
  RunConfig config = base;
  config.mode = model::Mode::kSupervised;
  config.layer_factors = {factor};
  const auto c_dim = base.layout.c_dim;
  const auto data = load_training_data(config);
  AblationReport report;
  report.factor = factor;
  report.steps = config.total_steps;
  config.layout = model::BlockLayout::with_default_carriers({2}, c_dim);
  report.block_accuracy = heldout_accuracy(config, data);
  config.layout = model::BlockLayout::with_default_carriers({1}, c_dim);
  report.single_accuracy = heldout_accuracy(config, data);
  return report;
}

}  // namespace bhivae::runner
