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

#include "bhivae/metrics/scores.hpp"

#include <numeric>
#include <string>

namespace bhivae::metrics {
namespace {

constexpr double kEntropyFloor = 1e-12;

void check_inputs(const Eigen::MatrixXd& latents, const FactorTable& table) {
  table.validate();
  if (latents.rows() != table.num_samples()) {
    throw ValidationError("latents have " + std::to_string(latents.rows()) + " rows but the factor table has " +
                          std::to_string(table.num_samples()));
  }
  if (latents.cols() < 1) throw ValidationError("latents need at least one dimension");
  if (!latents.allFinite()) throw ValidationError("latents contain non-finite values");
}

// Top minus runner-up of a score list; a single entry has runner-up 0.
double top_gap(std::vector<double> scores) {
  std::sort(scores.begin(), scores.end(), std::greater<>());
  return scores[0] - (scores.size() > 1 ? scores[1] : 0.0);
}

double best_ordered_assignment(const std::vector<std::int64_t>& order, const std::vector<double>& values,
                               const std::vector<int>& labels, const std::vector<std::int64_t>& sorted,
                               const std::vector<double>& class_weight, int cardinality) {
  // position[c] is the rank of class c in the threshold order, or -1 if absent.
  std::vector<int> position(static_cast<std::size_t>(cardinality), -1);
  for (std::size_t q = 0; q < order.size(); ++q) position[static_cast<std::size_t>(order[q])] = static_cast<int>(q);
  const std::size_t classes = order.size();
  std::vector<double> best(classes, 0.0);
  std::vector<double> group(classes, 0.0);
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::fill(group.begin(), group.end(), 0.0);
    const double v = values[static_cast<std::size_t>(sorted[i])];
    std::size_t j = i;
    for (; j < sorted.size() && values[static_cast<std::size_t>(sorted[j])] == v; ++j) {
      const int c = labels[static_cast<std::size_t>(sorted[j])];
      group[static_cast<std::size_t>(position[static_cast<std::size_t>(c)])] += class_weight[static_cast<std::size_t>(c)];
    }
    double prefix = best[0];
    for (std::size_t q = 0; q < classes; ++q) {
      prefix = std::max(prefix, best[q]);
      best[q] = prefix + group[q];
    }
    i = j;
  }
  return *std::max_element(best.begin(), best.end());
}

}  // namespace

std::vector<int> quantile_bins(std::span<const double> values, int bins) {
  if (bins < 2) throw ValidationError("need at least two bins");
  const auto n = static_cast<std::int64_t>(values.size());
  if (n < bins) throw ValidationError("need at least as many samples as bins");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> edges;
  for (int b = 1; b < bins; ++b) edges.push_back(sorted[static_cast<std::size_t>(b * n / bins)]);
  std::vector<int> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = static_cast<int>(std::upper_bound(edges.begin(), edges.end(), values[i]) - edges.begin());
  }
  return out;
}

double threshold_score(std::span<const double> values, std::span<const int> labels, int cardinality) {
  if (values.size() != labels.size()) throw ValidationError("values and labels differ in length");
  std::vector<std::int64_t> counts(static_cast<std::size_t>(cardinality), 0);
  std::vector<double> sums(static_cast<std::size_t>(cardinality), 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= cardinality) throw ValidationError("label out of range");
    counts[static_cast<std::size_t>(labels[i])] += 1;
    sums[static_cast<std::size_t>(labels[i])] += values[i];
  }
  std::vector<std::int64_t> present;
  std::vector<double> weight(static_cast<std::size_t>(cardinality), 0.0);
  for (int c = 0; c < cardinality; ++c) {
    if (counts[static_cast<std::size_t>(c)] > 0) {
      present.push_back(c);
      weight[static_cast<std::size_t>(c)] = 1.0 / static_cast<double>(counts[static_cast<std::size_t>(c)]);
    }
  }
  if (present.size() < 2) return 0.0;
  std::stable_sort(present.begin(), present.end(), [&](std::int64_t a, std::int64_t b) {
    return sums[static_cast<std::size_t>(a)] / static_cast<double>(counts[static_cast<std::size_t>(a)]) <
           sums[static_cast<std::size_t>(b)] / static_cast<double>(counts[static_cast<std::size_t>(b)]);
  });
  std::vector<double> vals(values.begin(), values.end());
  std::vector<int> labs(labels.begin(), labels.end());
  std::vector<std::int64_t> sorted(values.size());
  std::iota(sorted.begin(), sorted.end(), std::int64_t{0});
  std::stable_sort(sorted.begin(), sorted.end(),
                   [&](std::int64_t a, std::int64_t b) { return vals[static_cast<std::size_t>(a)] < vals[static_cast<std::size_t>(b)]; });
  const double forward = best_ordered_assignment(present, vals, labs, sorted, weight, cardinality);
  std::vector<std::int64_t> reversed(present.rbegin(), present.rend());
  const double backward = best_ordered_assignment(reversed, vals, labs, sorted, weight, cardinality);
  const double k = static_cast<double>(present.size());
  const double balanced = std::max(forward, backward) / k;
  const double chance = 1.0 / k;
  return std::clamp((balanced - chance) / (1.0 - chance), 0.0, 1.0);
}

namespace detail {

MetricResult mig(const Eigen::MatrixXd& latents, const FactorTable& table, int bins) {
  check_inputs(latents, table);
  const auto d = latents.cols();
  std::vector<std::vector<int>> binned;
  for (Eigen::Index j = 0; j < d; ++j) {
    const Eigen::VectorXd col = latents.col(j);
    binned.push_back(quantile_bins(std::span(col.data(), static_cast<std::size_t>(col.size())), bins));
  }
  MetricResult result;
  double total = 0.0;
  int counted = 0;
  for (std::size_t k = 0; k < table.num_factors(); ++k) {
    const auto labels = table.column(k);
    const int card = table.cardinalities[k];
    const double h = label_entropy(labels, card);
    FactorScore fs;
    if (h > kEntropyFloor) {
      std::vector<double> mis;
      for (Eigen::Index j = 0; j < d; ++j) {
        Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(bins, card);
        const auto& b = binned[static_cast<std::size_t>(j)];
        for (std::size_t i = 0; i < labels.size(); ++i) counts(b[i], labels[i]) += 1.0;
        mis.push_back(mi_discrete(counts));
      }
      fs.score = std::clamp(top_gap(std::move(mis)) / h, 0.0, 1.0);
      fs.counted = true;
      total += fs.score;
      ++counted;
    }
    result.per_factor.push_back(fs);
  }
  result.score = counted > 0 ? total / counted : 0.0;
  return result;
}

Eigen::MatrixXd block_projections(const Eigen::MatrixXd& latents, const model::BlockLayout& layout) {
  layout.validate();
  if (latents.cols() != layout.latent_dim()) {
    throw ValidationError("latent width " + std::to_string(latents.cols()) + " does not match layout width " +
                          std::to_string(layout.latent_dim()));
  }
  const std::size_t units = layout.traversal_units();
  Eigen::MatrixXd out(latents.rows(), static_cast<Eigen::Index>(units));
  for (std::size_t u = 0; u < units; ++u) {
    const auto [begin, end] = layout.unit_columns(u);
    out.col(static_cast<Eigen::Index>(u)) =
        latents.middleCols(begin, end - begin).rowwise().sum() / std::sqrt(static_cast<double>(end - begin));
  }
  return out;
}

MetricResult sap(const Eigen::MatrixXd& latents, const FactorTable& table) {
  check_inputs(latents, table);
  MetricResult result;
  double total = 0.0;
  int counted = 0;
  for (std::size_t k = 0; k < table.num_factors(); ++k) {
    const auto labels = table.column(k);
    const int card = table.cardinalities[k];
    std::vector<std::int64_t> counts(static_cast<std::size_t>(card), 0);
    for (int l : labels) ++counts[static_cast<std::size_t>(l)];
    const auto present = std::count_if(counts.begin(), counts.end(), [](std::int64_t c) { return c > 0; });
    FactorScore fs;
    if (present >= 2) {
      for (int c = 0; c < card; ++c) {
        const auto cnt = counts[static_cast<std::size_t>(c)];
        if (cnt > 0 && cnt < kSapMinClassCount) {
          throw ValidationError("factor '" + table.names[k] + "' class " + std::to_string(c) + " has only " +
                                std::to_string(cnt) + " samples; SAP needs " + std::to_string(kSapMinClassCount));
        }
      }
      std::vector<double> scores;
      for (Eigen::Index j = 0; j < latents.cols(); ++j) {
        const Eigen::VectorXd col = latents.col(j);
        scores.push_back(threshold_score(std::span(col.data(), static_cast<std::size_t>(col.size())), labels, card));
      }
      fs.score = top_gap(std::move(scores));
      fs.counted = true;
      total += fs.score;
      ++counted;
    }
    result.per_factor.push_back(fs);
  }
  result.score = counted > 0 ? total / counted : 0.0;
  return result;
}

}  // namespace detail
}  // namespace bhivae::metrics
