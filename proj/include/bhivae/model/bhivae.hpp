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
#include <optional>
#include <span>
#include <vector>

#include "bhivae/model/architecture.hpp"
#include "bhivae/ndgrad/graph.hpp"

namespace bhivae::model {

using ndgrad::Array;
using ndgrad::Graph;
using ndgrad::NodeId;

struct LayerNodes {
  NodeId mean;
  std::optional<NodeId> log_var;
  NodeId z;
  NodeId s;
  NodeId carrier;  // h^i, or c^L for the last layer
  NodeId carrier_mean;
  NodeId s_mean;
  std::optional<NodeId> s_log_var;
};

struct EncoderNodes {
  std::vector<LayerNodes> layers;
};

/// Hierarchical encoder over x (h^0 = x). With `noise` (one [batch, |z^i|]
/// node per layer) each z^i is the reparameterized sample mean + exp(logvar/2)
/// * noise; without it z^i is the mean.
EncoderNodes build_encoder(Graph& graph, const nn::ParamNodes& params, const Architecture& arch, NodeId x,
                           std::span<const NodeId> noise = {});
/// z = (s^1; ...; s^L; c^L).
NodeId build_assemble(Graph& graph, const EncoderNodes& code);
NodeId build_decoder(Graph& graph, const nn::ParamNodes& params, const Architecture& arch, NodeId z);
NodeId build_classifier(Graph& graph, const nn::ParamNodes& params, const Architecture& arch, std::size_t layer,
                        NodeId input, bool freeze);
NodeId build_projection(Graph& graph, const nn::ParamNodes& params, const Architecture& arch, std::size_t layer,
                        NodeId carrier, bool freeze);
NodeId build_discriminator(Graph& graph, const nn::ParamNodes& params, const Architecture& arch, std::size_t layer,
                           NodeId z);

struct LatentCode {
  std::vector<Array> s_parts;
  Array c_part;
  std::vector<Array> h_parts;
  // Per-layer heads over the whole z^i, and the noise that produced the sample
  // (supervised mode only).
  std::vector<Array> means;
  std::vector<Array> log_vars;
  std::vector<Array> noise;
};

LatentCode encode(const nn::ParamStore& params, const Architecture& arch, const Array& x, EncodeMode mode,
                  std::uint64_t seed = 0);
/// Stochastic encoding with caller-provided standard-normal noise per layer.
LatentCode encode_with_noise(const nn::ParamStore& params, const Architecture& arch, const Array& x,
                             std::span<const Array> noise);

Array assemble(const LatentCode& code);
/// Inverse of assemble: fills s_parts and c_part only.
LatentCode split(const Array& z, const BlockLayout& layout);

Array decode(const nn::ParamStore& params, const Architecture& arch, const Array& z);

/// Sets every coordinate of one traversal unit of a 1 x d(z) code to t.
Array traverse_block(const Array& z, const BlockLayout& layout, std::size_t unit, double t);

/// Standard-normal noise of shape [rows, cols], deterministic in `seed`.
Array standard_normal(std::int64_t rows, std::int64_t cols, std::uint64_t seed);

}  // namespace bhivae::model
