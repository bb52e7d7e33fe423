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
#include <vector>

#include "bhivae/ndgrad/graph.hpp"
#include "bhivae/nn/params.hpp"
#include "bhivae/runner/config.hpp"

namespace bhivae::runner {

struct AdamState {
  nn::ParamStore m;
  nn::ParamStore v;
  std::uint64_t step = 0;
};

AdamState init_adam(const nn::ParamStore& params);

/// Adam update of the parameters named in `group` that have a gradient in
/// `grads` (looked up through `nodes`), using the bias correction of
/// `state.step`. The caller advances `state.step` once per training step.
void adam_update(nn::ParamStore& params, AdamState& state, const nn::ParamNodes& nodes,
                 const ndgrad::GradientMap& grads, const OptimizerConfig& config, const std::vector<std::string>& group);

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::string config_json;  // canonical config echo
  std::uint64_t step = 0;
  nn::ParamStore params;
  AdamState adam;

  RunConfig config() const { return parse_config_text(config_json); }
};

/// "BHIV", u32 version, u32-prefixed config JSON, u64 step, u32 record count,
/// then per record: u32-prefixed name, u32 rank, u32 dims, float32 values. All
/// integers and floats little-endian. Adam moments are stored as
/// "adam.m/<name>" and "adam.v/<name>" records; the Adam step is the
/// training step.
std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes, const std::string& origin = "checkpoint");
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Rounds every value to float32, the precision checkpoints keep.
nn::ParamStore round_to_float(const nn::ParamStore& params);

}  // namespace bhivae::runner
