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

#include "bhivae/runner/evaluate.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "bhivae/errors.hpp"
#include "bhivae/metrics/scores.hpp"
#include "bhivae/metrics/z_diff.hpp"
#include "bhivae/objectives/prior.hpp"
#include "bhivae/runner/probe.hpp"

namespace bhivae::runner {
namespace {

bool in_unit(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

// Whole copies needed so every present class of every factor reaches the SAP
// minimum count.
std::int64_t tiles_for_sap(const metrics::FactorTable& table) {
  std::int64_t rarest = table.num_samples();
  for (std::size_t k = 0; k < table.num_factors(); ++k) {
    std::vector<std::int64_t> counts(static_cast<std::size_t>(table.cardinalities[k]), 0);
    for (Eigen::Index r = 0; r < table.values.rows(); ++r) ++counts[static_cast<std::size_t>(table.values(r, k))];
    for (auto c : counts) {
      if (c > 0) rarest = std::min(rarest, c);
    }
  }
  return (metrics::kSapMinClassCount + rarest - 1) / rarest;
}

}  // namespace

std::string ScoreReport::to_json() const {
  nlohmann::ordered_json j;
  j["z_diff"] = z_diff;
  j["sap"] = sap;
  j["mig"] = mig;
  j["block_mig"] = block_mig;
  auto& factors = j["per_factor"] = nlohmann::ordered_json::array();
  for (const auto& f : per_factor) {
    factors.push_back({{"name", f.name}, {"mig", f.mig}, {"block_mig", f.block_mig}, {"sap", f.sap}});
  }
  j["layer_kl"] = layer_kl;
  j["samples"] = samples;
  if (s_accuracy) j["s_accuracy"] = *s_accuracy;
  return j.dump(2);
}

void ScoreReport::validate() const {
  if (!std::isfinite(z_diff) || z_diff < 0.0 || z_diff > 100.0) throw ValidationError("z_diff outside [0, 100]");
  if (!in_unit(sap) || !in_unit(mig) || !in_unit(block_mig)) throw ValidationError("metric score outside [0, 1]");
  for (const auto& f : per_factor) {
    if (!in_unit(f.sap) || !in_unit(f.mig) || !in_unit(f.block_mig)) {
      throw ValidationError("score of factor '" + f.name + "' outside [0, 1]");
    }
  }
  for (double kl : layer_kl) {
    if (!std::isfinite(kl) || kl < 0.0) throw ValidationError("layer KL must be finite and nonnegative");
  }
  if (s_accuracy) {
    for (double a : *s_accuracy) {
      if (!in_unit(a)) throw ValidationError("accuracy outside [0, 1]");
    }
  }
}

std::vector<double> layer_kl(const Eigen::MatrixXd& latents, const model::BlockLayout& layout, double rho) {
  if (latents.cols() != layout.latent_dim()) throw ValidationError("latent width does not match the layout");
  std::vector<double> out;
  for (std::size_t i = 0; i < layout.num_layers(); ++i) {
    const objectives::BlockPrior prior({{layout.s_dims[i], rho}});
    try {
      // Fitted covariances of the sample are never exactly the truth, so a
      // tiny negative value is rounding.
      out.push_back(std::max(
          0.0, objectives::gaussian_fit_kl(latents.middleCols(layout.block_offset(i), layout.s_dims[i]), prior)));
    } catch (const NumericalError& e) {
      throw NumericalError("layer " + std::to_string(i) + " KL: " + e.what());
    }
  }
  return out;
}

ScoreReport evaluate_latents(const Eigen::MatrixXd& latents, const model::BlockLayout& layout,
                             const metrics::FactorTable& table, const MetricOptions& options, double rho,
                             std::uint64_t seed) {
  table.validate();
  if (latents.rows() != table.num_samples()) throw ValidationError("latent and factor row counts differ");
  if (latents.cols() != layout.latent_dim()) {
    throw ValidationError("latent width " + std::to_string(latents.cols()) + " does not match the layout width " +
                          std::to_string(layout.latent_dim()));
  }
  ScoreReport report;
  report.samples = latents.rows();
  const auto tiles = tiles_for_sap(table);
  Eigen::MatrixXd z = latents;
  metrics::FactorTable t = table;
  if (tiles > 1) {
    z = latents.replicate(tiles, 1);
    t.values = table.values.replicate(tiles, 1);
  }
  const auto mig = metrics::mig(z, t, options.bins);
  const auto block = metrics::block_mig(z, layout, t, options.bins);
  const auto sap = metrics::sap(z, t);
  report.mig = mig.score;
  report.block_mig = block.score;
  report.sap = sap.score;
  for (std::size_t k = 0; k < t.num_factors(); ++k) {
    report.per_factor.push_back({t.names[k], mig.per_factor[k].score, block.per_factor[k].score,
                                 sap.per_factor[k].score});
  }
  metrics::ZDiffConfig zc;
  zc.n_votes = options.votes;
  zc.pairs_per_vote = options.pairs_per_vote;
  zc.seed = seed;
  report.z_diff = metrics::z_diff(latents, table, zc);
  report.layer_kl = layer_kl(latents, layout, rho);
  return report;
}

ScoreReport evaluate(const LoadedModel& model, const data::Dataset& dataset, std::uint64_t seed) {
  dataset.validate();
  if (dataset.pixels() != model.arch.data_dim) {
    throw ValidationError("dataset images have " + std::to_string(dataset.pixels()) +
                          " pixels but the model expects " + std::to_string(model.arch.data_dim));
  }
  const auto latents = encode_means(model, dataset.images);
  auto report = evaluate_latents(latents, model.arch.layout, dataset.factors, model.config.metrics,
                                 model.config.rho, seed);
  if (model.config.mode == model::Mode::kSupervised) report.s_accuracy = s_accuracy(model, dataset);
  return report;
}

}  // namespace bhivae::runner
