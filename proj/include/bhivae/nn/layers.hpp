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
#include <span>
#include <string_view>
#include <vector>

#include "bhivae/ndgrad/graph.hpp"
#include "bhivae/nn/params.hpp"

namespace bhivae::nn {

enum class Activation { kIdentity, kRelu, kTanh, kSigmoid };

struct MlpSpec {
  /// Input width followed by the width of each layer; at least one layer.
  std::vector<std::int64_t> layer_sizes;
  Activation hidden = Activation::kRelu;
  Activation output = Activation::kIdentity;

  std::size_t num_layers() const { return layer_sizes.empty() ? 0 : layer_sizes.size() - 1; }
  std::int64_t in_width() const { return layer_sizes.front(); }
  std::int64_t out_width() const { return layer_sizes.back(); }
  void validate() const;
};

struct DenseParams {
  Array weight;  // in x out
  Array bias;    // out
};

struct DenseNodes {
  NodeId weight;
  NodeId bias;
};

/// Glorot-uniform half-width sqrt(6 / (fan_in + fan_out)).
double glorot_bound(std::int64_t fan_in, std::int64_t fan_out);

/// Glorot-uniform weights and zero biases, deterministic in `seed`.
std::vector<DenseParams> init_mlp(const MlpSpec& spec, std::uint64_t seed);

/// Stores layer l as "<prefix>.<l>.w" and "<prefix>.<l>.b".
void store_mlp(ParamStore& store, std::string_view prefix, std::span<const DenseParams> layers);
std::vector<DenseParams> load_mlp(const ParamStore& store, std::string_view prefix, const MlpSpec& spec);
std::vector<DenseNodes> mlp_nodes(const ParamNodes& nodes, std::string_view prefix, const MlpSpec& spec);

/// The same parameters behind stop-gradient nodes.
std::vector<DenseNodes> frozen(ndgrad::Graph& graph, std::span<const DenseNodes> layers);

NodeId activate(ndgrad::Graph& graph, NodeId x, Activation act);
NodeId dense(ndgrad::Graph& graph, const DenseNodes& layer, NodeId x);
NodeId mlp(ndgrad::Graph& graph, std::span<const DenseNodes> layers, NodeId x, const MlpSpec& spec);

/// Direct evaluation of an MLP on a batch (batch x in).
Array mlp_forward(std::span<const DenseParams> layers, const Array& x, const MlpSpec& spec);

/// An MLP's spec bundled with its parameters.
struct Mlp {
  MlpSpec spec;
  std::vector<DenseParams> layers;

  static Mlp init(MlpSpec spec, std::uint64_t seed);
  Array forward(const Array& x) const { return mlp_forward(layers, x, spec); }
  void store(ParamStore& store, std::string_view prefix) const { store_mlp(store, prefix, layers); }
  std::vector<DenseNodes> declare(ndgrad::Graph& graph, ndgrad::Bindings& bindings, std::string_view prefix) const;
};

/// Batch of one-hot rows; labels outside [0, classes) throw ValidationError.
Array one_hot(std::span<const int> labels, std::int64_t classes);

/// Mean over the batch of -log softmax(logits)[label], in nats.
NodeId softmax_cross_entropy(ndgrad::Graph& graph, NodeId logits, NodeId one_hot_labels);
double softmax_cross_entropy(const Array& logits, std::span<const int> labels);

/// Mean over the batch of the entropy of softmax(logits), in nats.
NodeId predictive_entropy(ndgrad::Graph& graph, NodeId logits);
double predictive_entropy(const Array& logits);

}  // namespace bhivae::nn
