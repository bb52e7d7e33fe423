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

#include "bhivae/model/bhivae.hpp"

#include <random>
#include <string>

#include "bhivae/errors.hpp"

namespace bhivae::model {

using ndgrad::Bindings;

EncoderNodes build_encoder(Graph& graph, const nn::ParamNodes& params, const Architecture& arch, NodeId x,
                           std::span<const NodeId> noise) {
  const auto& layout = arch.layout;
  const auto L = layout.num_layers();
  const bool sample = !noise.empty();
  if (sample && noise.size() != L) throw ValidationError("stochastic encoding needs one noise input per layer");
  if (sample && !arch.stochastic()) throw ValidationError("stochastic encoding needs log-variance heads");

  EncoderNodes out;
  NodeId input = x;
  for (std::size_t i = 0; i < L; ++i) {
    auto trunk = nn::mlp(graph, nn::mlp_nodes(params, names::trunk(i), arch.encoder_trunk(i)), input,
                         arch.encoder_trunk(i));
    LayerNodes layer;
    layer.mean = nn::mlp(graph, nn::mlp_nodes(params, names::mean_head(i), arch.latent_head(i)), trunk,
                         arch.latent_head(i));
    if (arch.stochastic()) {
      layer.log_var = nn::mlp(graph, nn::mlp_nodes(params, names::log_var_head(i), arch.latent_head(i)), trunk,
                              arch.latent_head(i));
    }
    if (sample) {
      auto sigma = graph.exp(graph.scale(*layer.log_var, 0.5));
      layer.z = graph.add(layer.mean, graph.mul(sigma, noise[i]));
    } else {
      layer.z = layer.mean;
    }
    const auto s = layout.s_dims[i];
    const auto w = layout.layer_width(i);
    layer.s = graph.slice(layer.z, 0, s);
    layer.carrier = graph.slice(layer.z, s, w);
    layer.s_mean = graph.slice(layer.mean, 0, s);
    layer.carrier_mean = graph.slice(layer.mean, s, w);
    if (layer.log_var) layer.s_log_var = graph.slice(*layer.log_var, 0, s);
    input = layer.carrier;
    out.layers.push_back(layer);
  }
  return out;
}

NodeId build_assemble(Graph& graph, const EncoderNodes& code) {
  std::vector<NodeId> parts;
  for (const auto& l : code.layers) parts.push_back(l.s);
  parts.push_back(code.layers.back().carrier);
  return graph.concat(parts);
}

NodeId build_decoder(Graph& graph, const nn::ParamNodes& params, const Architecture& arch, NodeId z) {
  const auto& layout = arch.layout;
  const auto& zs = graph.shape(z);
  if (zs.size() != 2 || zs[1] != layout.latent_dim()) {
    throw ValidationError("decoder expects codes of width " + std::to_string(layout.latent_dim()) + ", got shape " +
                          ndgrad::to_string(zs));
  }
  std::vector<NodeId> merged;
  for (std::size_t j = 0; j <= layout.num_layers(); ++j) {
    const auto begin = layout.block_offset(j);
    const auto end = j < layout.num_layers() ? begin + layout.s_dims[j] : layout.latent_dim();
    auto block = graph.slice(z, begin, end);
    merged.push_back(
        nn::mlp(graph, nn::mlp_nodes(params, names::part(j), arch.part_decoder(j)), block, arch.part_decoder(j)));
  }
  auto spec = arch.merge_decoder();
  return nn::mlp(graph, nn::mlp_nodes(params, names::kMerge, spec), graph.concat(merged), spec);
}

NodeId build_classifier(Graph& graph, const nn::ParamNodes& params, const Architecture& arch, std::size_t layer,
                        NodeId input, bool freeze) {
  auto spec = arch.classifier(layer);
  auto nodes = nn::mlp_nodes(params, names::classifier(layer), spec);
  if (freeze) nodes = nn::frozen(graph, nodes);
  return nn::mlp(graph, nodes, input, spec);
}

NodeId build_projection(Graph& graph, const nn::ParamNodes& params, const Architecture& arch, std::size_t layer,
                        NodeId carrier, bool freeze) {
  auto spec = arch.projection(layer);
  auto nodes = nn::mlp_nodes(params, names::projection(layer), spec);
  if (freeze) nodes = nn::frozen(graph, nodes);
  return nn::mlp(graph, nodes, carrier, spec);
}

NodeId build_discriminator(Graph& graph, const nn::ParamNodes& params, const Architecture& arch, std::size_t layer,
                           NodeId z) {
  auto spec = arch.discriminator(layer);
  return nn::mlp(graph, nn::mlp_nodes(params, names::discriminator(layer), spec), z, spec);
}

namespace {

LatentCode run_encoder(const nn::ParamStore& params, const Architecture& arch, const Array& x,
                       std::span<const Array> noise) {
  arch.validate();
  if (x.rank() != 2 || x.shape()[1] != arch.data_dim) {
    throw ValidationError("encoder expects inputs of width " + std::to_string(arch.data_dim) + ", got shape " +
                          ndgrad::to_string(x.shape()));
  }
  const auto batch = x.shape()[0];
  Graph g;
  Bindings b;
  auto nodes = nn::declare(g, params);
  nn::bind(b, params);
  auto xn = g.input("x", x.shape());
  b.set_ref("x", x);
  std::vector<NodeId> noise_nodes;
  for (std::size_t i = 0; i < noise.size(); ++i) {
    const auto name = "noise" + std::to_string(i);
    noise_nodes.push_back(g.input(name, {batch, arch.layout.layer_width(i)}));
    b.set_ref(name, noise[i]);
  }
  auto enc = build_encoder(g, nodes, arch, xn, noise_nodes);
  auto ev = evaluate(g, b);

  LatentCode code;
  const auto L = arch.layout.num_layers();
  for (std::size_t i = 0; i < L; ++i) {
    const auto& layer = enc.layers[i];
    code.s_parts.push_back(ev.value(layer.s));
    if (i + 1 < L) {
      code.h_parts.push_back(ev.value(layer.carrier));
    } else {
      code.c_part = ev.value(layer.carrier);
    }
    code.means.push_back(ev.value(layer.mean));
    if (layer.log_var) code.log_vars.push_back(ev.value(*layer.log_var));
  }
  code.noise.assign(noise.begin(), noise.end());
  return code;
}

}  // namespace

Array standard_normal(std::int64_t rows, std::int64_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Array out({rows, cols});
  for (auto& v : out.values()) v = n(rng);
  return out;
}

LatentCode encode(const nn::ParamStore& params, const Architecture& arch, const Array& x, EncodeMode mode,
                  std::uint64_t seed) {
  if (mode == EncodeMode::kDeterministic) return run_encoder(params, arch, x, {});
  if (!arch.stochastic()) throw ValidationError("stochastic encoding needs log-variance heads");
  std::vector<Array> noise;
  for (std::size_t i = 0; i < arch.layout.num_layers(); ++i) {
    noise.push_back(standard_normal(x.shape().at(0), arch.layout.layer_width(i), seed + 7919 * i));
  }
  return run_encoder(params, arch, x, noise);
}

LatentCode encode_with_noise(const nn::ParamStore& params, const Architecture& arch, const Array& x,
                             std::span<const Array> noise) {
  if (noise.size() != arch.layout.num_layers()) {
    throw ValidationError("stochastic encoding needs one noise array per layer");
  }
  return run_encoder(params, arch, x, noise);
}

Array assemble(const LatentCode& code) {
  if (code.s_parts.empty()) throw ValidationError("latent code has no feature blocks");
  const auto rows = code.c_part.rows();
  std::int64_t width = code.c_part.cols();
  for (const auto& s : code.s_parts) {
    if (s.rows() != rows) throw ValidationError("latent parts disagree on batch size");
    width += s.cols();
  }
  ndgrad::Matrix z(rows, width);
  Eigen::Index col = 0;
  for (const auto& s : code.s_parts) {
    z.middleCols(col, s.cols()) = s.matrix();
    col += s.cols();
  }
  z.middleCols(col, code.c_part.cols()) = code.c_part.matrix();
  return Array::from_matrix(std::move(z));
}

LatentCode split(const Array& z, const BlockLayout& layout) {
  layout.validate();
  if (z.rank() != 2 || z.shape()[1] != layout.latent_dim()) {
    throw ValidationError("code of shape " + ndgrad::to_string(z.shape()) + " does not match latent width " +
                          std::to_string(layout.latent_dim()));
  }
  LatentCode code;
  for (std::size_t i = 0; i < layout.num_layers(); ++i) {
    code.s_parts.push_back(Array::from_matrix(z.matrix().middleCols(layout.block_offset(i), layout.s_dims[i])));
  }
  code.c_part = Array::from_matrix(z.matrix().middleCols(layout.block_offset(layout.num_layers()), layout.c_dim));
  return code;
}

Array decode(const nn::ParamStore& params, const Architecture& arch, const Array& z) {
  arch.validate();
  Graph g;
  Bindings b;
  auto nodes = nn::declare(g, params);
  nn::bind(b, params);
  if (z.rank() != 2) throw ValidationError("decoder expects a batch of codes");
  auto zn = g.input("z", z.shape());
  b.set_ref("z", z);
  auto out = build_decoder(g, nodes, arch, zn);
  return evaluate(g, b).value(out);
}

Array traverse_block(const Array& z, const BlockLayout& layout, std::size_t unit, double t) {
  if (z.rank() != 2 || z.shape()[0] != 1 || z.shape()[1] != layout.latent_dim()) {
    throw ValidationError("traversal needs a single 1 x " + std::to_string(layout.latent_dim()) + " code");
  }
  const auto [begin, end] = layout.unit_columns(unit);
  Array out = z;
  out.matrix().middleCols(begin, end - begin).setConstant(t);
  return out;
}

}  // namespace bhivae::model
