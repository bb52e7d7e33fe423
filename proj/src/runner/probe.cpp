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

#include "bhivae/runner/probe.hpp"

#include <algorithm>

#include "bhivae/errors.hpp"
#include "bhivae/model/bhivae.hpp"
#include "bhivae/nn/layers.hpp"
#include "bhivae/runner/checkpoint.hpp"
#include "bhivae/runner/datasets.hpp"
#include "bhivae/util/random.hpp"

namespace bhivae::runner {
namespace {

using ndgrad::Array;

constexpr std::int64_t kChunk = 512;

struct LayerCodes {
  std::vector<Eigen::MatrixXd> s;
  std::vector<Eigen::MatrixXd> carrier;
};

LayerCodes encode_layers(const LoadedModel& model, const Array& images) {
  const auto& layout = model.arch.layout;
  const auto L = layout.num_layers();
  const auto n = images.rows();
  LayerCodes out;
  for (std::size_t i = 0; i < L; ++i) {
    out.s.emplace_back(n, layout.s_dims[i]);
    out.carrier.emplace_back(n, layout.carrier_width(i));
  }
  for (std::int64_t begin = 0; begin < n; begin += kChunk) {
    const auto m = std::min(kChunk, n - begin);
    const auto code = model::encode(model.params, model.arch, Array::from_matrix(images.matrix().middleRows(begin, m)),
                                    model::EncodeMode::kDeterministic);
    for (std::size_t i = 0; i < L; ++i) {
      out.s[i].middleRows(begin, m) = code.s_parts[i].matrix();
      out.carrier[i].middleRows(begin, m) = (i + 1 < L ? code.h_parts[i] : code.c_part).matrix();
    }
  }
  return out;
}

double accuracy(const Array& logits, std::span<const int> labels) {
  std::int64_t hits = 0;
  for (std::int64_t r = 0; r < logits.rows(); ++r) {
    Eigen::Index best = 0;
    logits.matrix().row(r).maxCoeff(&best);
    if (best == labels[static_cast<std::size_t>(r)]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(logits.rows());
}

nn::Mlp stored_mlp(const nn::ParamStore& params, const std::string& prefix, const nn::MlpSpec& spec) {
  return {spec, nn::load_mlp(params, prefix, spec)};
}

std::vector<int> labels_for(const LoadedModel& model, const data::Dataset& dataset, std::size_t layer) {
  return dataset.labels(model.config.layer_factors.at(layer));
}

void require_supervised(const LoadedModel& model) {
  if (model.config.mode != model::Mode::kSupervised) {
    throw ValidationError("classifier accuracy needs a supervised checkpoint");
  }
}

}  // namespace

std::vector<double> ProbeResult::worst() const {
  std::vector<double> out(trained.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(trained[i], fresh[i]);
  return out;
}

std::vector<double> s_accuracy(const LoadedModel& model, const data::Dataset& dataset) {
  require_supervised(model);
  const auto codes = encode_layers(model, dataset.images);
  std::vector<double> out;
  for (std::size_t i = 0; i < codes.s.size(); ++i) {
    const auto cls = stored_mlp(model.params, model::names::classifier(i), model.arch.classifier(i));
    out.push_back(accuracy(cls.forward(Array::from_matrix(codes.s[i])), labels_for(model, dataset, i)));
  }
  return out;
}

ProbeResult carrier_probe(const LoadedModel& model, const data::Dataset& train, const data::Dataset& heldout,
                          const ProbeOptions& options) {
  require_supervised(model);
  const auto train_codes = encode_layers(model, train.images);
  const auto held_codes = encode_layers(model, heldout.images);
  ProbeResult result;
  for (std::size_t i = 0; i < train_codes.s.size(); ++i) {
    const auto cls_spec = model.arch.classifier(i);
    const auto proj_spec = model.arch.projection(i);
    const auto cls = stored_mlp(model.params, model::names::classifier(i), cls_spec);
    const auto trained_proj = stored_mlp(model.params, model::names::projection(i), proj_spec);
    const auto held_labels = labels_for(model, heldout, i);
    const Array held_h = Array::from_matrix(held_codes.carrier[i]);
    result.chance.push_back(1.0 / static_cast<double>(model.arch.classes[i]));
    result.trained.push_back(accuracy(cls.forward(trained_proj.forward(held_h)), held_labels));

    // Fresh projection against the frozen classifier.
    nn::ParamStore store;
    nn::Mlp::init(proj_spec, util::derive_seed(options.seed, i)).store(store, "proj");
    cls.store(store, "cls");
    ndgrad::Graph g;
    ndgrad::Bindings b;
    const auto nodes = nn::declare(g, store);
    nn::bind(b, store);
    const auto n = train_codes.carrier[i].rows();
    const auto h = g.input("h", {n, proj_spec.in_width()});
    const auto y = g.input("y", {n, model.arch.classes[i]});
    b.set("h", Array::from_matrix(train_codes.carrier[i]));
    b.set("y", nn::one_hot(labels_for(model, train, i), model.arch.classes[i]));
    const auto projected = nn::mlp(g, nn::mlp_nodes(nodes, "proj", proj_spec), h, proj_spec);
    const auto logits = nn::mlp(g, nn::mlp_nodes(nodes, "cls", cls_spec), projected, cls_spec);
    const auto loss = nn::softmax_cross_entropy(g, logits, y);
    const auto group = store.names("proj");
    std::vector<ndgrad::NodeId> wrt;
    for (const auto& name : group) wrt.push_back(nn::lookup(nodes, name));
    auto adam = init_adam(store);
    OptimizerConfig opt;
    opt.step_size = options.step_size;
    for (int step = 0; step < options.steps; ++step) {
      const auto ev = ndgrad::evaluate(g, b);
      const auto grads = ndgrad::gradients(ev, loss, wrt);
      ++adam.step;
      adam_update(store, adam, nodes, grads, opt, group);
    }
    const auto fresh = stored_mlp(store, "proj", proj_spec);
    result.fresh.push_back(accuracy(cls.forward(fresh.forward(held_h)), held_labels));
  }
  return result;
}

}  // namespace bhivae::runner
