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

#include "bhivae/objectives/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bhivae/errors.hpp"
#include "bhivae/util/random.hpp"

namespace bhivae::objectives {
namespace {

constexpr double kProbFloor = 1e-6;

double run_scalar(const Graph& graph, const ndgrad::Bindings& bindings, NodeId out) {
  const auto ev = ndgrad::evaluate(graph, bindings);
  return ev.scalar(out);
}

void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw ValidationError(std::string(what) + ": per-layer term lists differ in length");
}

NodeId weighted_sum(Graph& graph, std::span<const NodeId> base, std::span<const NodeId> extra, double weight) {
  NodeId total = graph.add(base.front(), graph.scale(extra.front(), weight));
  for (std::size_t i = 1; i < base.size(); ++i) {
    total = graph.add(total, graph.add(base[i], graph.scale(extra[i], weight)));
  }
  return total;
}

}  // namespace

void LossWeights::validate() const {
  if (!std::isfinite(beta) || beta < 0.0) throw ValidationError("beta must be finite and non-negative");
  if (!std::isfinite(gamma) || gamma < 0.0) throw ValidationError("gamma must be finite and non-negative");
}

NodeId kl_diag_gaussian_to_standard(Graph& graph, NodeId mu, NodeId log_var) {
  const NodeId terms =
      graph.add_scalar(graph.sub(graph.add(graph.mul(mu, mu), graph.exp(log_var)), log_var), -1.0);
  return graph.scale(graph.reduce_mean(graph.reduce_sum(terms, ndgrad::Axis::kLast)), 0.5);
}

double kl_diag_gaussian_to_standard(const Array& mu, const Array& log_var) {
  if (mu.shape() != log_var.shape()) throw ValidationError("mu and log_var shapes differ");
  Graph g;
  const NodeId m = g.input("mu", mu.shape());
  const NodeId lv = g.input("log_var", log_var.shape());
  const NodeId out = kl_diag_gaussian_to_standard(g, m, lv);
  ndgrad::Bindings b;
  b.set_ref("mu", mu);
  b.set_ref("log_var", log_var);
  return run_scalar(g, b, out);
}

NodeId reconstruction_loss(Graph& graph, NodeId x, NodeId x_hat) {
  if (graph.shape(x) != graph.shape(x_hat)) {
    throw ValidationError("reconstruction: x " + ndgrad::to_string(graph.shape(x)) + " vs x_hat " +
                          ndgrad::to_string(graph.shape(x_hat)));
  }
  const NodeId p = graph.clamp(x_hat, kProbFloor, 1.0 - kProbFloor);
  const NodeId one_minus_x = graph.add_scalar(graph.negate(x), 1.0);
  const NodeId one_minus_p = graph.add_scalar(graph.negate(p), 1.0);
  const NodeId ll = graph.add(graph.mul(x, graph.log(p)), graph.mul(one_minus_x, graph.log(one_minus_p)));
  return graph.negate(graph.reduce_mean(graph.reduce_sum(ll, ndgrad::Axis::kLast)));
}

double reconstruction_loss(const Array& x, const Array& x_hat) {
  Graph g;
  const NodeId xn = g.input("x", x.shape());
  const NodeId xh = g.input("x_hat", x_hat.shape());
  const NodeId out = reconstruction_loss(g, xn, xh);
  ndgrad::Bindings b;
  b.set_ref("x", x);
  b.set_ref("x_hat", x_hat);
  return run_scalar(g, b, out);
}

NodeId constant_class_cross_entropy(Graph& graph, NodeId logits, std::int64_t label) {
  const auto& s = graph.shape(logits);
  if (s.empty() || label < 0 || label >= s.back()) {
    throw ValidationError("class " + std::to_string(label) + " out of range for logits " + ndgrad::to_string(s));
  }
  const NodeId picked = graph.reduce_sum(graph.slice(logits, label, label + 1), ndgrad::Axis::kLast);
  return graph.reduce_mean(graph.sub(graph.log_sum_exp(logits), picked));
}

NodeId supervised_layer_loss(Graph& graph, NodeId mu, NodeId log_var, NodeId class_logits, NodeId one_hot_labels,
                             double beta) {
  const NodeId kl = kl_diag_gaussian_to_standard(graph, mu, log_var);
  const NodeId ce = nn::softmax_cross_entropy(graph, class_logits, one_hot_labels);
  return graph.add(kl, graph.scale(ce, beta));
}

double supervised_layer_loss(const Array& mu, const Array& log_var, const Array& s_sample,
                             std::span<const int> labels, const nn::Mlp& classifier, double beta) {
  const double kl = kl_diag_gaussian_to_standard(mu, log_var);
  const double ce = nn::softmax_cross_entropy(classifier.forward(s_sample), labels);
  return kl + beta * ce;
}

NodeId max_entropy_erasure(Graph& graph, NodeId h, std::span<const nn::DenseNodes> classifier,
                           const nn::MlpSpec& classifier_spec, std::span<const nn::DenseNodes> projection,
                           const nn::MlpSpec& projection_spec) {
  if (projection_spec.out_width() != classifier_spec.in_width()) {
    throw ValidationError("projection width " + std::to_string(projection_spec.out_width()) +
                          " does not match classifier input " + std::to_string(classifier_spec.in_width()));
  }
  const auto frozen_proj = nn::frozen(graph, projection);
  const auto frozen_cls = nn::frozen(graph, classifier);
  const NodeId projected = nn::mlp(graph, frozen_proj, h, projection_spec);
  const NodeId logits = nn::mlp(graph, frozen_cls, projected, classifier_spec);
  return graph.negate(nn::predictive_entropy(graph, logits));
}

double max_entropy_erasure(const Array& h, const nn::Mlp& classifier, const nn::Mlp& projection) {
  if (projection.spec.out_width() != classifier.spec.in_width()) {
    throw ValidationError("projection width does not match classifier input");
  }
  return -nn::predictive_entropy(classifier.forward(projection.forward(h)));
}

NodeId total_supervised_loss(Graph& graph, std::span<const NodeId> class_bounds, std::span<const NodeId> erasures,
                             NodeId recon, const LossWeights& weights) {
  weights.validate();
  require_same_length(class_bounds.size(), erasures.size(), "total_supervised_loss");
  if (class_bounds.empty()) throw ValidationError("total_supervised_loss needs at least one layer");
  return graph.add(weighted_sum(graph, class_bounds, erasures, weights.gamma), graph.scale(recon, weights.beta));
}

double total_supervised_loss(std::span<const double> class_bounds, std::span<const double> erasures, double recon,
                             const LossWeights& weights) {
  weights.validate();
  require_same_length(class_bounds.size(), erasures.size(), "total_supervised_loss");
  double total = weights.beta * recon;
  for (std::size_t i = 0; i < class_bounds.size(); ++i) total += class_bounds[i] + weights.gamma * erasures[i];
  return total;
}

std::vector<std::int64_t> random_permutation(std::int64_t n, std::uint64_t seed) {
  return util::random_permutation(n, seed);
}

Array permutation_array(std::span<const std::int64_t> perm) {
  std::vector<double> values(perm.begin(), perm.end());
  return Array({static_cast<std::int64_t>(values.size())}, values);
}

Array permute_joint(const Array& s, const Array& h, std::uint64_t seed) {
  if (s.rank() != 2 || h.rank() != 2) throw ValidationError("permute_joint expects rank-2 batches");
  const auto n = s.rows();
  if (h.rows() != n) throw ValidationError("permute_joint: batch sizes differ");
  if (n < 2) throw ValidationError("permute_joint needs at least two rows");
  const auto ps = random_permutation(n, util::derive_seed(seed, 0));
  const auto ph = random_permutation(n, util::derive_seed(seed, 1));
  ndgrad::Matrix out(n, s.cols() + h.cols());
  for (Eigen::Index r = 0; r < n; ++r) {
    out.row(r).head(s.cols()) = s.matrix().row(ps[static_cast<std::size_t>(r)]);
    out.row(r).tail(h.cols()) = h.matrix().row(ph[static_cast<std::size_t>(r)]);
  }
  return Array::from_matrix(std::move(out));
}

double tc_estimate(const ProbabilityFn& discriminator, const Array& z) {
  if (z.rank() != 2 || z.rows() < 1) throw ValidationError("tc_estimate expects a non-empty n x d batch");
  const Array p = discriminator(z);
  if (p.size() != z.rows()) {
    throw ContractError("discriminator returned " + std::to_string(p.size()) + " outputs for " +
                        std::to_string(z.rows()) + " rows");
  }
  double sum = 0.0;
  for (std::int64_t i = 0; i < p.size(); ++i) {
    const double d = p.values()[static_cast<std::size_t>(i)];
    if (!std::isfinite(d) || d < 0.0 || d > 1.0) {
      throw ContractError("discriminator output " + std::to_string(d) + " at row " + std::to_string(i) +
                          " is not a probability");
    }
    const double c = std::clamp(d, kProbFloor, 1.0 - kProbFloor);
    sum += std::log(c / (1.0 - c));
  }
  return sum / static_cast<double>(p.size());
}

DiscriminatorNodes discriminator_losses(Graph& graph, NodeId posterior_logits, NodeId prior_logits,
                                        NodeId permuted_logits) {
  for (NodeId l : {posterior_logits, prior_logits, permuted_logits}) {
    const auto& s = graph.shape(l);
    if (s.size() != 2 || s[1] != 3) throw ValidationError("discriminator logits must be [n, 3], got " + ndgrad::to_string(s));
  }
  const NodeId ce_post = constant_class_cross_entropy(graph, posterior_logits, kPosteriorClass);
  const NodeId ce_prior = constant_class_cross_entropy(graph, prior_logits, kPriorClass);
  const NodeId ce_perm = constant_class_cross_entropy(graph, permuted_logits, kPermutedClass);
  const NodeId disc = graph.scale(graph.add(graph.add(ce_post, ce_prior), ce_perm), 1.0 / 3.0);
  auto column = [&](std::int64_t k) { return graph.slice(posterior_logits, k, k + 1); };
  const NodeId post = column(kPosteriorClass);
  const NodeId gen_kl = graph.reduce_mean(graph.sub(post, column(kPriorClass)));
  const NodeId tc = graph.reduce_mean(graph.sub(post, column(kPermutedClass)));
  return {disc, gen_kl, tc};
}

DiscriminatorTerms discriminator_losses(const LogitFn& discriminator, const Array& real_z, const Array& prior_z,
                                        const Array& permuted_z) {
  if (real_z.cols() != prior_z.cols() || real_z.cols() != permuted_z.cols()) {
    throw ValidationError("discriminator batches differ in width");
  }
  const Array lr = discriminator(real_z);
  const Array lp = discriminator(prior_z);
  const Array lq = discriminator(permuted_z);
  Graph g;
  const NodeId a = g.input("post", lr.shape());
  const NodeId b = g.input("prior", lp.shape());
  const NodeId c = g.input("perm", lq.shape());
  const auto nodes = discriminator_losses(g, a, b, c);
  ndgrad::Bindings bind;
  bind.set_ref("post", lr);
  bind.set_ref("prior", lp);
  bind.set_ref("perm", lq);
  const auto ev = ndgrad::evaluate(g, bind);
  return {ev.scalar(nodes.disc_loss), ev.scalar(nodes.gen_kl), ev.scalar(nodes.tc)};
}

NodeId total_unsupervised_loss(Graph& graph, std::span<const NodeId> gen_kl, std::span<const NodeId> tc, NodeId recon,
                               const LossWeights& weights) {
  weights.validate();
  require_same_length(gen_kl.size(), tc.size(), "total_unsupervised_loss");
  if (gen_kl.empty()) throw ValidationError("total_unsupervised_loss needs at least one layer");
  return graph.add(weighted_sum(graph, gen_kl, tc, weights.gamma), graph.scale(recon, weights.beta));
}

double total_unsupervised_loss(std::span<const double> gen_kl, std::span<const double> tc, double recon,
                               const LossWeights& weights) {
  weights.validate();
  require_same_length(gen_kl.size(), tc.size(), "total_unsupervised_loss");
  double total = weights.beta * recon;
  for (std::size_t i = 0; i < gen_kl.size(); ++i) total += gen_kl[i] + weights.gamma * tc[i];
  return total;
}

}  // namespace bhivae::objectives
