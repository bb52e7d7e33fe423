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

#include "bhivae/model/architecture.hpp"

#include "bhivae/errors.hpp"
#include "bhivae/util/random.hpp"

namespace bhivae::model {

namespace {

std::vector<std::int64_t> chain(std::int64_t in, const std::vector<std::int64_t>& hidden, std::int64_t out) {
  std::vector<std::int64_t> sizes{in};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

}  // namespace

void Architecture::validate() const {
  layout.validate();
  if (data_dim <= 0) throw ValidationError("data dimension must be positive");
  if (merge_width <= 0) throw ValidationError("merge width must be positive");
  if (mode == Mode::kSupervised) {
    if (classes.size() != layout.num_layers()) {
      throw ValidationError("supervised mode needs one factor cardinality per layer");
    }
    for (auto n : classes) {
      if (n < 2) throw ValidationError("supervised factors need at least two categories");
    }
  }
}

std::int64_t Architecture::layer_input_width(std::size_t layer) const {
  return layer == 0 ? data_dim : layout.carrier_width(layer - 1);
}

nn::MlpSpec Architecture::encoder_trunk(std::size_t layer) const {
  std::vector<std::int64_t> sizes{layer_input_width(layer)};
  sizes.insert(sizes.end(), encoder_hidden.begin(), encoder_hidden.end());
  if (sizes.size() < 2) throw ValidationError("encoder needs at least one hidden layer");
  return {sizes, nn::Activation::kRelu, nn::Activation::kRelu};
}

nn::MlpSpec Architecture::latent_head(std::size_t layer) const {
  return {{encoder_hidden.back(), layout.layer_width(layer)}, nn::Activation::kIdentity, nn::Activation::kIdentity};
}

nn::MlpSpec Architecture::part_decoder(std::size_t part) const {
  const auto width = part < layout.num_layers() ? layout.s_dims.at(part) : layout.c_dim;
  return {chain(width, part_hidden, merge_width), nn::Activation::kRelu, nn::Activation::kRelu};
}

nn::MlpSpec Architecture::merge_decoder() const {
  const auto in = merge_width * static_cast<std::int64_t>(layout.num_layers() + 1);
  return {chain(in, merge_hidden, data_dim), nn::Activation::kRelu, nn::Activation::kSigmoid};
}

nn::MlpSpec Architecture::classifier(std::size_t layer) const {
  return {chain(layout.s_dims.at(layer), classifier_hidden, classes.at(layer)), nn::Activation::kRelu,
          nn::Activation::kIdentity};
}

nn::MlpSpec Architecture::projection(std::size_t layer) const {
  return {{layout.carrier_width(layer), layout.s_dims.at(layer)}, nn::Activation::kIdentity,
          nn::Activation::kIdentity};
}

nn::MlpSpec Architecture::discriminator(std::size_t layer) const {
  return {chain(layout.layer_width(layer), discriminator_hidden, 3), nn::Activation::kRelu,
          nn::Activation::kIdentity};
}

namespace names {
std::string trunk(std::size_t layer) { return "enc" + std::to_string(layer) + ".trunk"; }
std::string mean_head(std::size_t layer) { return "enc" + std::to_string(layer) + ".mean"; }
std::string log_var_head(std::size_t layer) { return "enc" + std::to_string(layer) + ".logvar"; }
std::string part(std::size_t part) { return "dec.part" + std::to_string(part); }
std::string classifier(std::size_t layer) { return "cls" + std::to_string(layer); }
std::string projection(std::size_t layer) { return "proj" + std::to_string(layer); }
std::string discriminator(std::size_t layer) { return "disc" + std::to_string(layer); }
}  // namespace names

nn::ParamStore init_params(const Architecture& arch, std::uint64_t seed) {
  arch.validate();
  nn::ParamStore store;
  std::uint64_t stream = 0;
  auto add = [&](const std::string& prefix, const nn::MlpSpec& spec) {
    nn::store_mlp(store, prefix, nn::init_mlp(spec, util::derive_seed(seed, stream++)));
  };
  const auto L = arch.layout.num_layers();
  for (std::size_t i = 0; i < L; ++i) {
    add(names::trunk(i), arch.encoder_trunk(i));
    add(names::mean_head(i), arch.latent_head(i));
    if (arch.stochastic()) add(names::log_var_head(i), arch.latent_head(i));
  }
  for (std::size_t j = 0; j <= L; ++j) add(names::part(j), arch.part_decoder(j));
  add(names::kMerge, arch.merge_decoder());
  for (std::size_t i = 0; i < L; ++i) {
    if (arch.mode == Mode::kSupervised) {
      add(names::classifier(i), arch.classifier(i));
      add(names::projection(i), arch.projection(i));
    } else {
      add(names::discriminator(i), arch.discriminator(i));
    }
  }
  return store;
}

}  // namespace bhivae::model
