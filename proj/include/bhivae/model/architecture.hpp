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
#include <string>
#include <vector>

#include "bhivae/model/layout.hpp"
#include "bhivae/nn/layers.hpp"
#include "bhivae/nn/params.hpp"

namespace bhivae::model {

enum class Mode { kSupervised, kUnsupervised };
enum class EncodeMode { kDeterministic, kStochastic };

/// Network shapes around a BlockLayout.
///
/// Every encoder layer is a ReLU trunk over h^{i-1} followed by a linear mean
/// head (and, in supervised mode, a log-variance head) of width |z^i|. Each
/// of the L+1 representation parts has its own decoder into a shared merge
/// space of width `merge_width`; the concatenated parts go through the merge
/// decoder to a sigmoid image.
struct Architecture {
  BlockLayout layout;
  Mode mode = Mode::kUnsupervised;
  std::int64_t data_dim = 0;
  std::vector<std::int64_t> encoder_hidden{256, 128};
  std::vector<std::int64_t> part_hidden{64};
  std::int64_t merge_width = 32;
  std::vector<std::int64_t> merge_hidden{256};
  std::vector<std::int64_t> classifier_hidden{32};
  std::vector<std::int64_t> discriminator_hidden{64, 64};
  /// Supervised mode: number of categories n_i of the factor assigned to each layer.
  std::vector<std::int64_t> classes;

  void validate() const;

  bool stochastic() const { return mode == Mode::kSupervised; }
  std::int64_t layer_input_width(std::size_t layer) const;

  nn::MlpSpec encoder_trunk(std::size_t layer) const;
  nn::MlpSpec latent_head(std::size_t layer) const;
  /// Part j < L decodes s^{j+1}; part L decodes c^L.
  nn::MlpSpec part_decoder(std::size_t part) const;
  nn::MlpSpec merge_decoder() const;
  nn::MlpSpec classifier(std::size_t layer) const;
  /// Linear map from the layer's carrier to the classifier input width.
  nn::MlpSpec projection(std::size_t layer) const;
  /// Three-way softmax head over {posterior, prior, permuted} for z^i.
  nn::MlpSpec discriminator(std::size_t layer) const;
};

namespace names {
std::string trunk(std::size_t layer);
std::string mean_head(std::size_t layer);
std::string log_var_head(std::size_t layer);
std::string part(std::size_t part);
inline constexpr const char* kMerge = "dec.merge";
std::string classifier(std::size_t layer);
std::string projection(std::size_t layer);
std::string discriminator(std::size_t layer);
}  // namespace names

/// All parameter groups the mode needs, deterministic in `seed`.
nn::ParamStore init_params(const Architecture& arch, std::uint64_t seed);

}  // namespace bhivae::model
