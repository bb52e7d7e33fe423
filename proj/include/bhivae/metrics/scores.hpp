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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "bhivae/errors.hpp"
#include "bhivae/metrics/factors.hpp"
#include "bhivae/model/layout.hpp"

namespace bhivae::metrics {

/// Plug-in mutual information in nats of a joint count table, with 0 log 0 = 0.
template <typename Derived>
double mi_discrete(const Eigen::MatrixBase<Derived>& counts) {
  const Eigen::ArrayXXd c = counts.template cast<double>().array();
  if ((c < 0.0).any() || !c.isFinite().all()) throw ValidationError("joint counts must be finite and non-negative");
  const double total = c.sum();
  if (total <= 0.0) throw ValidationError("joint count table is empty");
  const Eigen::ArrayXXd p = c / total;
  const Eigen::ArrayXd pa = p.rowwise().sum();
  const Eigen::ArrayXd pb = p.colwise().sum().transpose();
  double mi = 0.0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
      if (p(i, j) > 0.0) mi += p(i, j) * std::log(p(i, j) / (pa(i) * pb(j)));
    }
  }
  return std::max(mi, 0.0);
}

/// Equal-count quantile bins: edge b is the sorted value at rank floor(b n / bins)
/// and a value's bin is the number of edges at or below it, so ties share a bin.
std::vector<int> quantile_bins(std::span<const double> values, int bins);

struct FactorScore {
  double score = 0.0;
  bool counted = false;  // false for constant factors, which are left out of the mean
};

struct MetricResult {
  double score = 0.0;
  std::vector<FactorScore> per_factor;
};

namespace detail {
MetricResult mig(const Eigen::MatrixXd& latents, const FactorTable& table, int bins);
MetricResult sap(const Eigen::MatrixXd& latents, const FactorTable& table);
Eigen::MatrixXd block_projections(const Eigen::MatrixXd& latents, const model::BlockLayout& layout);
}  // namespace detail

/// Mean over factors of the normalized gap between the two most informative
/// latent dimensions.
template <typename Derived>
MetricResult mig(const Eigen::MatrixBase<Derived>& latents, const FactorTable& table, int bins = 20) {
  return detail::mig(latents.eval(), table, bins);
}

/// Diagonal projection s . 1 / sqrt(width) of every feature block, followed by
/// the same projection of each residual sub-block of two columns.
template <typename Derived>
Eigen::MatrixXd block_projections(const Eigen::MatrixBase<Derived>& latents, const model::BlockLayout& layout) {
  return detail::block_projections(latents.eval(), layout);
}

/// MIG over block_projections.
template <typename Derived>
MetricResult block_mig(const Eigen::MatrixBase<Derived>& latents, const model::BlockLayout& layout,
                       const FactorTable& table, int bins = 20) {
  return detail::mig(detail::block_projections(latents.eval(), layout), table, bins);
}

/// Minimum count of every class of a factor for SAP.
inline constexpr std::int64_t kSapMinClassCount = 50;

/// Balanced accuracy of the best ordered-threshold classifier predicting
/// `labels` from `values`, rescaled so chance is 0 and perfect is 1. With two
/// classes this is the best single threshold.
double threshold_score(std::span<const double> values, std::span<const int> labels, int cardinality);

/// Mean over factors of the gap between the best and second-best per-dimension
/// threshold scores.
template <typename Derived>
MetricResult sap(const Eigen::MatrixBase<Derived>& latents, const FactorTable& table) {
  return detail::sap(latents.eval(), table);
}

}  // namespace bhivae::metrics
