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
#include <functional>
#include <span>
#include <vector>

#include "bhivae/ndgrad/graph.hpp"
#include "bhivae/nn/layers.hpp"

namespace bhivae::objectives {

using ndgrad::Array;
using ndgrad::Graph;
using ndgrad::NodeId;

struct LossWeights {
  double beta = 10.0;
  double gamma = 3.0;

  void validate() const;
};

/// Batch mean of 0.5 * sum_d (mu^2 + exp(log_var) - log_var - 1).
NodeId kl_diag_gaussian_to_standard(Graph& graph, NodeId mu, NodeId log_var);
double kl_diag_gaussian_to_standard(const Array& mu, const Array& log_var);

/// Batch mean of the per-sample Bernoulli NLL summed over pixels; x_hat is
/// clamped to [1e-6, 1 - 1e-6].
NodeId reconstruction_loss(Graph& graph, NodeId x, NodeId x_hat);
double reconstruction_loss(const Array& x, const Array& x_hat);

/// Mean cross-entropy of every row of `logits` against one fixed class.
NodeId constant_class_cross_entropy(Graph& graph, NodeId logits, std::int64_t label);

/// KL(q(s|h) || N(0, I)) + beta * CE(classifier logits on the s sample, labels).
NodeId supervised_layer_loss(Graph& graph, NodeId mu, NodeId log_var, NodeId class_logits, NodeId one_hot_labels,
                             double beta);
double supervised_layer_loss(const Array& mu, const Array& log_var, const Array& s_sample,
                             std::span<const int> labels, const nn::Mlp& classifier, double beta);

/// Negative predictive entropy of classifier(projection(h)). Both networks sit
/// behind stop-gradients, so only h receives gradient.
NodeId max_entropy_erasure(Graph& graph, NodeId h, std::span<const nn::DenseNodes> classifier,
                           const nn::MlpSpec& classifier_spec, std::span<const nn::DenseNodes> projection,
                           const nn::MlpSpec& projection_spec);
double max_entropy_erasure(const Array& h, const nn::Mlp& classifier, const nn::Mlp& projection);

/// Sum over layers of class_bound[i] + gamma * erasure[i], plus beta * recon.
NodeId total_supervised_loss(Graph& graph, std::span<const NodeId> class_bounds, std::span<const NodeId> erasures,
                             NodeId recon, const LossWeights& weights);
double total_supervised_loss(std::span<const double> class_bounds, std::span<const double> erasures, double recon,
                             const LossWeights& weights);

/// Uniformly random permutation of [0, n), deterministic in `seed`.
std::vector<std::int64_t> random_permutation(std::int64_t n, std::uint64_t seed);
/// Indices as a rank-1 array, for Graph::gather_rows.
Array permutation_array(std::span<const std::int64_t> perm);
/// Rows of s and h shuffled by independent permutations, then concatenated.
Array permute_joint(const Array& s, const Array& h, std::uint64_t seed);

/// Maps a batch n x d to probabilities n x 1 (or n).
using ProbabilityFn = std::function<Array(const Array&)>;
/// Maps a batch n x d to logits n x k.
using LogitFn = std::function<Array(const Array&)>;

/// Batch mean of log(D / (1 - D)). Outputs outside [0, 1] or non-finite throw
/// ContractError; outputs are clamped to [1e-6, 1 - 1e-6] before the log.
double tc_estimate(const ProbabilityFn& discriminator, const Array& z);

/// Class order of the three-way discriminator.
inline constexpr std::int64_t kPosteriorClass = 0;
inline constexpr std::int64_t kPriorClass = 1;
inline constexpr std::int64_t kPermutedClass = 2;

struct DiscriminatorNodes {
  NodeId disc_loss;  // mean of the three cross-entropies
  NodeId gen_kl;     // mean log p_post/p_prior on posterior samples
  NodeId tc;         // mean log p_post/p_perm on posterior samples
};

/// Train disc_loss with respect to discriminator parameters only and the
/// generator terms with respect to encoder parameters only.
DiscriminatorNodes discriminator_losses(Graph& graph, NodeId posterior_logits, NodeId prior_logits,
                                        NodeId permuted_logits);

struct DiscriminatorTerms {
  double disc_loss = 0.0;
  double gen_kl = 0.0;
  double tc = 0.0;
};

DiscriminatorTerms discriminator_losses(const LogitFn& discriminator, const Array& real_z, const Array& prior_z,
                                        const Array& permuted_z);

/// Sum over layers of gen_kl[i] + gamma * tc[i], plus beta * recon.
NodeId total_unsupervised_loss(Graph& graph, std::span<const NodeId> gen_kl, std::span<const NodeId> tc, NodeId recon,
                               const LossWeights& weights);
double total_unsupervised_loss(std::span<const double> gen_kl, std::span<const double> tc, double recon,
                               const LossWeights& weights);

}  // namespace bhivae::objectives
