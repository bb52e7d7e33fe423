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

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "bhivae/errors.hpp"
#include "bhivae/model/layout.hpp"
#include "bhivae/ndgrad/array.hpp"

namespace bhivae::objectives {

struct PriorBlock {
  std::int64_t width = 1;
  double rho = 0.0;  // common off-diagonal correlation inside the block
};

/// Zero-mean Gaussian prior N(0, Sigma) with block-diagonal Sigma. A block of
/// width k with correlation rho has unit diagonal and rho off the diagonal;
/// rho = 0 gives an identity block.
class BlockPrior {
 public:
  explicit BlockPrior(std::vector<PriorBlock> blocks);

  /// Prior over a whole code z: every feature block correlated, residual identity.
  static BlockPrior for_code(const model::BlockLayout& layout, double rho);
  /// Prior over one layer's z^i = (s^i; h^i): s^i correlated, carrier identity.
  static BlockPrior for_layer(const model::BlockLayout& layout, std::size_t layer, double rho);

  std::int64_t dim() const { return covariance_.rows(); }
  const std::vector<PriorBlock>& blocks() const { return blocks_; }
  const Eigen::MatrixXd& covariance() const { return covariance_; }
  /// Lower-triangular L with L L^T = Sigma.
  const Eigen::MatrixXd& cholesky_factor() const { return chol_; }
  double log_det() const { return log_det_; }
  Eigen::MatrixXd precision() const;

 private:
  std::vector<PriorBlock> blocks_;
  Eigen::MatrixXd covariance_;
  Eigen::MatrixXd chol_;
  double log_det_ = 0.0;
};

/// Closed-form KL(N(0, I) || N(0, Sigma)) = (tr(Sigma^-1) - d + ln det Sigma) / 2.
double kl_standard_to_block_prior(const BlockPrior& prior);

/// n draws of Chol(Sigma) * eps, deterministic in `seed`.
ndgrad::Array sample_prior(const BlockPrior& prior, std::int64_t n, std::uint64_t seed);

/// KL(N(m, S) || N(0, Sigma)) for the moment-matched Gaussian (m, S) of the
/// rows of `samples`.
template <typename Derived>
double gaussian_fit_kl(const Eigen::MatrixBase<Derived>& samples, const BlockPrior& prior) {
  const auto n = samples.rows();
  const auto d = samples.cols();
  if (d != prior.dim()) throw ValidationError("sample width does not match the prior dimension");
  if (n < 2) throw ValidationError("a Gaussian fit needs at least two samples");
  const Eigen::RowVectorXd mean = samples.colwise().mean();
  const Eigen::MatrixXd centered = samples.rowwise() - mean;
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
  Eigen::LLT<Eigen::MatrixXd> fit(cov);
  if (fit.info() != Eigen::Success) throw NumericalError("fitted covariance is singular");
  const double fit_log_det = 2.0 * fit.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const Eigen::MatrixXd precision = prior.precision();
  const double trace = (precision * cov).trace();
  const double mahalanobis = mean * precision * mean.transpose();
  return 0.5 * (trace + mahalanobis - static_cast<double>(d) + prior.log_det() - fit_log_det);
}

}  // namespace bhivae::objectives
