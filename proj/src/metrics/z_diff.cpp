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

#include "bhivae/metrics/z_diff.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "bhivae/errors.hpp"

namespace bhivae::metrics {
namespace {

constexpr double kMinSpread = 1e-12;

std::size_t pick(std::size_t n, std::mt19937_64& rng) {
  return static_cast<std::size_t>(rng() % static_cast<std::uint64_t>(n));
}

}  // namespace

double z_diff(const LatentEncoder& encoder, const ZDiffSource& source, const ZDiffConfig& config) {
  if (source.num_factors == 0) throw ValidationError("z_diff needs at least one factor");
  if (config.n_votes < 2 || config.pairs_per_vote < 1 || config.reference_samples < 2) {
    throw ValidationError("z_diff needs n_votes >= 2, pairs_per_vote >= 1 and reference_samples >= 2");
  }
  std::mt19937_64 rng(config.seed);
  const Eigen::MatrixXd reference = encoder(source.sample(config.reference_samples, rng));
  const Eigen::RowVectorXd mean = reference.colwise().mean();
  const Eigen::RowVectorXd spread =
      ((reference.rowwise() - mean).array().square().colwise().sum() / static_cast<double>(reference.rows() - 1))
          .sqrt();
  std::vector<Eigen::Index> dims;
  for (Eigen::Index j = 0; j < spread.size(); ++j) {
    if (spread(j) > kMinSpread) dims.push_back(j);
  }
  if (dims.empty()) throw ValidationError("every latent dimension is constant");

  std::vector<std::size_t> factor(static_cast<std::size_t>(config.n_votes));
  std::vector<Eigen::Index> vote(static_cast<std::size_t>(config.n_votes));
  for (int v = 0; v < config.n_votes; ++v) {
    const std::size_t k = pick(source.num_factors, rng);
    const auto [xa, xb] = source.sample_pairs(k, config.pairs_per_vote, rng);
    const Eigen::MatrixXd za = encoder(xa);
    const Eigen::MatrixXd zb = encoder(xb);
    const Eigen::RowVectorXd diff = (za - zb).cwiseAbs().colwise().mean().cwiseQuotient(spread);
    Eigen::Index best = dims.front();
    for (Eigen::Index j : dims) {
      if (diff(j) < diff(best)) best = j;
    }
    factor[static_cast<std::size_t>(v)] = k;
    vote[static_cast<std::size_t>(v)] = best;
  }

  const std::size_t train = factor.size() / 2;
  std::map<Eigen::Index, std::vector<int>> tallies;
  std::vector<int> overall(source.num_factors, 0);
  for (std::size_t v = 0; v < train; ++v) {
    auto& t = tallies[vote[v]];
    t.resize(source.num_factors, 0);
    ++t[factor[v]];
    ++overall[factor[v]];
  }
  const auto argmax = [](const std::vector<int>& t) {
    return static_cast<std::size_t>(std::max_element(t.begin(), t.end()) - t.begin());
  };
  const std::size_t fallback = argmax(overall);
  int correct = 0;
  for (std::size_t v = train; v < factor.size(); ++v) {
    const auto it = tallies.find(vote[v]);
    const std::size_t predicted = it == tallies.end() ? fallback : argmax(it->second);
    if (predicted == factor[v]) ++correct;
  }
  return 100.0 * correct / static_cast<double>(factor.size() - train);
}

double z_diff(const Eigen::MatrixXd& latents, const FactorTable& table, const ZDiffConfig& config) {
  table.validate();
  if (latents.rows() != table.num_samples()) throw ValidationError("latents and factor table differ in length");
  // For each usable factor, the sample indices grouped by that factor's value.
  std::vector<std::vector<std::vector<std::int64_t>>> groups;
  std::vector<std::size_t> owner;
  for (std::size_t k = 0; k < table.num_factors(); ++k) {
    std::vector<std::vector<std::int64_t>> g(static_cast<std::size_t>(table.cardinalities[k]));
    for (Eigen::Index i = 0; i < table.values.rows(); ++i) {
      g[static_cast<std::size_t>(table.values(i, static_cast<Eigen::Index>(k)))].push_back(i);
    }
    std::erase_if(g, [](const auto& members) { return members.empty(); });
    if (g.size() >= 2) {
      groups.push_back(std::move(g));
      owner.push_back(k);
    }
  }
  if (groups.empty()) throw ValidationError("z_diff needs a factor with at least two observed values");
  const auto n = table.num_samples();
  const auto indices = [](const std::vector<std::int64_t>& rows) {
    ndgrad::Array a({static_cast<std::int64_t>(rows.size()), 1});
    for (std::size_t i = 0; i < rows.size(); ++i) a.values()[i] = static_cast<double>(rows[i]);
    return a;
  };
  ZDiffSource source;
  source.num_factors = groups.size();
  source.sample = [&](std::int64_t count, std::mt19937_64& rng) {
    std::vector<std::int64_t> rows(static_cast<std::size_t>(count));
    for (auto& r : rows) r = static_cast<std::int64_t>(pick(static_cast<std::size_t>(n), rng));
    return indices(rows);
  };
  source.sample_pairs = [&](std::size_t k, std::int64_t count, std::mt19937_64& rng) {
    std::vector<std::int64_t> a(static_cast<std::size_t>(count));
    std::vector<std::int64_t> b(static_cast<std::size_t>(count));
    const auto row_count = static_cast<std::size_t>(n);
    for (std::size_t p = 0; p < a.size(); ++p) {
      a[p] = static_cast<std::int64_t>(pick(row_count, rng));
      const int value = table.values(a[p], static_cast<Eigen::Index>(owner[k]));
      // Groups were compacted, so look the value up among the surviving ones.
      const auto& g = *std::find_if(groups[k].begin(), groups[k].end(), [&](const auto& members) {
        return table.values(members.front(), static_cast<Eigen::Index>(owner[k])) == value;
      });
      b[p] = g[pick(g.size(), rng)];
    }
    return std::make_pair(indices(a), indices(b));
  };
  const LatentEncoder lookup = [&](const ndgrad::Array& rows) {
    Eigen::MatrixXd out(rows.size(), latents.cols());
    for (std::int64_t i = 0; i < rows.size(); ++i) {
      out.row(i) = latents.row(static_cast<Eigen::Index>(rows.values()[static_cast<std::size_t>(i)]));
    }
    return out;
  };
  return z_diff(lookup, source, config);
}

}  // namespace bhivae::metrics
