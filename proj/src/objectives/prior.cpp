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

#include "bhivae/objectives/prior.hpp"

#include <random>
#include <string>

namespace bhivae::objectives {

BlockPrior::BlockPrior(std::vector<PriorBlock> blocks) : blocks_(std::move(blocks)) {
  std::int64_t d = 0;
  for (const auto& b : blocks_) {
    if (b.width <= 0) throw ValidationError("prior blocks need a positive width");
    if (!(std::abs(b.rho) < 1.0)) throw ValidationError("prior correlation must satisfy |rho| < 1");
    d += b.width;
  }
  if (d == 0) throw ValidationError("prior needs at least one block");
  covariance_ = Eigen::MatrixXd::Zero(d, d);
  std::int64_t at = 0;
  for (const auto& b : blocks_) {
    covariance_.block(at, at, b.width, b.width).setConstant(b.rho);
    covariance_.block(at, at, b.width, b.width).diagonal().setOnes();
    at += b.width;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(covariance_);
  if (llt.info() != Eigen::Success) throw NumericalError("prior covariance is not positive definite");
  chol_ = llt.matrixL();
  log_det_ = 2.0 * chol_.diagonal().array().log().sum();
}

BlockPrior BlockPrior::for_code(const model::BlockLayout& layout, double rho) {
  std::vector<PriorBlock> blocks;
  for (auto w : layout.s_dims) blocks.push_back({w, rho});
  blocks.push_back({layout.c_dim, 0.0});
  return BlockPrior(std::move(blocks));
}

BlockPrior BlockPrior::for_layer(const model::BlockLayout& layout, std::size_t layer, double rho) {
  return BlockPrior({{layout.s_dims.at(layer), rho}, {layout.carrier_width(layer), 0.0}});
}

Eigen::MatrixXd BlockPrior::precision() const {
  return Eigen::LLT<Eigen::MatrixXd>(covariance_).solve(Eigen::MatrixXd::Identity(dim(), dim()));
}

double kl_standard_to_block_prior(const BlockPrior& prior) {
  const double trace = prior.precision().trace();
  const double value = 0.5 * (trace - static_cast<double>(prior.dim()) + prior.log_det());
  if (!std::isfinite(value)) throw NumericalError("KL to the block prior is not finite");
  return value;
}

ndgrad::Array sample_prior(const BlockPrior& prior, std::int64_t n, std::uint64_t seed) {
  if (n < 1) throw ValidationError("sample_prior needs n >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  ndgrad::Matrix eps(n, prior.dim());
  for (Eigen::Index i = 0; i < eps.size(); ++i) eps.data()[i] = normal(rng);
  ndgrad::Matrix z = eps * prior.cholesky_factor().transpose();
  return ndgrad::Array::from_matrix(std::move(z));
}

}  // namespace bhivae::objectives
