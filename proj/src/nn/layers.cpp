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

#include "bhivae/nn/layers.hpp"

#include <cmath>
#include <random>
#include <string>

#include "bhivae/errors.hpp"

namespace bhivae::nn {

using ndgrad::Axis;
using ndgrad::Bindings;
using ndgrad::Graph;

namespace {

std::string layer_name(std::string_view prefix, std::size_t l, const char* part) {
  return std::string(prefix) + "." + std::to_string(l) + "." + part;
}

}  // namespace

void MlpSpec::validate() const {
  if (layer_sizes.size() < 2) throw ValidationError("an MLP needs an input width and at least one layer");
  for (auto s : layer_sizes) {
    if (s <= 0) throw ValidationError("MLP layer sizes must be positive");
  }
}

double glorot_bound(std::int64_t fan_in, std::int64_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

std::vector<DenseParams> init_mlp(const MlpSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  std::vector<DenseParams> layers;
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    const auto in = spec.layer_sizes[l];
    const auto out = spec.layer_sizes[l + 1];
    const double b = glorot_bound(in, out);
    std::uniform_real_distribution<double> u(-b, b);
    DenseParams p{Array({in, out}), Array({out})};
    for (auto& w : p.weight.values()) w = u(rng);
    layers.push_back(std::move(p));
  }
  return layers;
}

void store_mlp(ParamStore& store, std::string_view prefix, std::span<const DenseParams> layers) {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    store.insert(layer_name(prefix, l, "w"), layers[l].weight);
    store.insert(layer_name(prefix, l, "b"), layers[l].bias);
  }
}

std::vector<DenseParams> load_mlp(const ParamStore& store, std::string_view prefix, const MlpSpec& spec) {
  std::vector<DenseParams> out;
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    out.push_back({store.at(layer_name(prefix, l, "w")), store.at(layer_name(prefix, l, "b"))});
  }
  return out;
}

std::vector<DenseNodes> mlp_nodes(const ParamNodes& nodes, std::string_view prefix, const MlpSpec& spec) {
  std::vector<DenseNodes> out;
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    out.push_back({lookup(nodes, layer_name(prefix, l, "w")), lookup(nodes, layer_name(prefix, l, "b"))});
  }
  return out;
}

std::vector<DenseNodes> frozen(Graph& graph, std::span<const DenseNodes> layers) {
  std::vector<DenseNodes> out;
  for (const auto& l : layers) out.push_back({graph.stop_gradient(l.weight), graph.stop_gradient(l.bias)});
  return out;
}

NodeId activate(Graph& graph, NodeId x, Activation act) {
  switch (act) {
    case Activation::kIdentity: return x;
    case Activation::kRelu: return graph.relu(x);
    case Activation::kTanh: return graph.tanh(x);
    case Activation::kSigmoid: return graph.sigmoid(x);
  }
  return x;
}

NodeId dense(Graph& graph, const DenseNodes& layer, NodeId x) {
  return graph.add(graph.matmul(x, layer.weight), layer.bias);
}

NodeId mlp(Graph& graph, std::span<const DenseNodes> layers, NodeId x, const MlpSpec& spec) {
  spec.validate();
  if (layers.size() != spec.num_layers()) throw ValidationError("MLP parameter count does not match its spec");
  const auto& xs = graph.shape(x);
  if (xs.size() != 2 || xs[1] != spec.in_width()) {
    throw ValidationError("MLP expects input width " + std::to_string(spec.in_width()) + ", got shape " +
                          ndgrad::to_string(xs));
  }
  NodeId h = x;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    h = dense(graph, layers[l], h);
    h = activate(graph, h, l + 1 == layers.size() ? spec.output : spec.hidden);
  }
  return h;
}

Array mlp_forward(std::span<const DenseParams> layers, const Array& x, const MlpSpec& spec) {
  spec.validate();
  if (layers.size() != spec.num_layers()) throw ValidationError("MLP parameter count does not match its spec");
  if (x.rank() != 2 || x.shape()[1] != spec.in_width()) {
    throw ValidationError("MLP expects input width " + std::to_string(spec.in_width()) + ", got shape " +
                          ndgrad::to_string(x.shape()));
  }
  Graph g;
  Bindings b;
  b.set_ref("x", x);
  std::vector<DenseNodes> nodes;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto w = "w" + std::to_string(l);
    const auto bias = "b" + std::to_string(l);
    nodes.push_back({g.input(w, layers[l].weight.shape()), g.input(bias, layers[l].bias.shape())});
    b.set_ref(w, layers[l].weight);
    b.set_ref(bias, layers[l].bias);
  }
  auto out = mlp(g, nodes, g.input("x", x.shape()), spec);
  return evaluate(g, b).value(out);
}

Mlp Mlp::init(MlpSpec spec, std::uint64_t seed) {
  auto layers = init_mlp(spec, seed);
  return {std::move(spec), std::move(layers)};
}

std::vector<DenseNodes> Mlp::declare(Graph& graph, Bindings& bindings, std::string_view prefix) const {
  std::vector<DenseNodes> nodes;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto w = layer_name(prefix, l, "w");
    const auto b = layer_name(prefix, l, "b");
    nodes.push_back({graph.input(w, layers[l].weight.shape()), graph.input(b, layers[l].bias.shape())});
    bindings.set_ref(w, layers[l].weight);
    bindings.set_ref(b, layers[l].bias);
  }
  return nodes;
}

Array one_hot(std::span<const int> labels, std::int64_t classes) {
  Array out({static_cast<std::int64_t>(labels.size()), classes});
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= classes) {
      throw ValidationError("label " + std::to_string(labels[i]) + " at row " + std::to_string(i) +
                            " is outside [0," + std::to_string(classes) + ")");
    }
    out.matrix()(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  }
  return out;
}

NodeId softmax_cross_entropy(Graph& graph, NodeId logits, NodeId one_hot_labels) {
  auto picked = graph.reduce_sum(graph.mul(logits, one_hot_labels), Axis::kLast);
  return graph.reduce_mean(graph.sub(graph.log_sum_exp(logits), picked));
}

NodeId predictive_entropy(Graph& graph, NodeId logits) {
  const auto& s = graph.shape(logits);
  if (s.empty() || s.back() < 2) throw ValidationError("predictive entropy needs at least two classes");
  auto p = graph.softmax(logits);
  auto expected_logit = graph.reduce_sum(graph.mul(p, logits), Axis::kLast);
  return graph.reduce_mean(graph.sub(graph.log_sum_exp(logits), expected_logit));
}

double softmax_cross_entropy(const Array& logits, std::span<const int> labels) {
  if (logits.rank() != 2 || logits.shape()[0] != static_cast<std::int64_t>(labels.size())) {
    throw ValidationError("cross-entropy needs batch x classes logits and one label per row");
  }
  Graph g;
  Bindings b;
  b.set_ref("logits", logits);
  b.set("labels", one_hot(labels, logits.shape()[1]));
  auto l = g.input("logits", logits.shape());
  auto y = g.input("labels", logits.shape());
  auto loss = softmax_cross_entropy(g, l, y);
  return evaluate(g, b).scalar(loss);
}

double predictive_entropy(const Array& logits) {
  Graph g;
  Bindings b;
  b.set_ref("logits", logits);
  auto l = g.input("logits", logits.shape());
  auto h = predictive_entropy(g, l);
  return evaluate(g, b).scalar(h);
}

}  // namespace bhivae::nn
