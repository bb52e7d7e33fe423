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

#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "bhivae/errors.hpp"
#include "bhivae/metrics/factors.hpp"
#include "bhivae/model/architecture.hpp"
#include "bhivae/objectives/losses.hpp"
#include "bhivae/runner/checkpoint.hpp"
#include "bhivae/runner/config.hpp"
#include "bhivae/runner/datasets.hpp"
#include "bhivae/runner/evaluate.hpp"
#include "bhivae/runner/trainer.hpp"
#include "bhivae/runner/traversal.hpp"
#include "bhivae/util/random.hpp"

namespace bhivae::runner {
namespace {

// A small grid keeps each run to a fraction of a second per step.
RunConfig tiny_config(model::Mode mode, std::int64_t steps) {
  RunConfig c;
  c.mode = mode;
  c.layout = model::BlockLayout::with_default_carriers({1, 1}, 2);
  c.layer_factors = {"scale", "shape"};
  c.batch_size = 32;
  c.total_steps = steps;
  c.seed = 3;
  c.dataset.factors = {{"shape", 3, data::FactorRole::kShape},
                       {"scale", 2, data::FactorRole::kScale},
                       {"pos_x", 2, data::FactorRole::kPosX},
                       {"pos_y", 2, data::FactorRole::kPosY}};
  c.dataset.min_samples = 256;
  return c;
}

TEST(ConfigTest, DefaultsFillOmittedKeys) {
  const auto c = parse_config_text(R"({"mode": "unsupervised", "layout": {"s_dims": [2, 2], "c_dim": 3}})");
  EXPECT_EQ(c.weights.beta, 10.0);
  EXPECT_EQ(c.weights.gamma, 3.0);
  EXPECT_EQ(c.rho, 0.5);
  EXPECT_EQ(c.batch_size, 128);
  EXPECT_EQ(c.layout.num_layers(), 2u);
  EXPECT_EQ(c.layout.c_dim, 3);
}

TEST(ConfigTest, MissingLayoutIsRejected) {
  EXPECT_THROW(parse_config_text(R"({"mode": "supervised"})"), ConfigError);
}

TEST(ConfigTest, MisspelledKeyIsRejected) {
  EXPECT_THROW(parse_config_text(R"({"layout": {"s_dims": [2], "c_dim": 2}, "betta": 3})"), ConfigError);
}

TEST(ConfigTest, EchoParsesBackToSameConfig) {
  const auto c = tiny_config(model::Mode::kSupervised, 5);
  EXPECT_EQ(config_to_json(parse_config_text(config_to_json(c))), config_to_json(c));
}

TEST(CheckpointTest, RoundTripIsExact) {
  const auto result = train(tiny_config(model::Mode::kSupervised, 3));
  const auto bytes = serialize_checkpoint(result.checkpoint);
  const auto back = deserialize_checkpoint(bytes);
  EXPECT_EQ(back.step, 3u);
  EXPECT_EQ(back.config_json, result.checkpoint.config_json);
  ASSERT_EQ(back.params.size(), result.checkpoint.params.size());
  for (const auto& [name, value] : result.checkpoint.params) EXPECT_TRUE(back.params.at(name) == value) << name;
  EXPECT_EQ(serialize_checkpoint(back), bytes);
}

TEST(CheckpointTest, CorruptMagicIsRejected) {
  auto bytes = serialize_checkpoint(train(tiny_config(model::Mode::kUnsupervised, 0)).checkpoint);
  bytes[0] ^= 0xff;
  EXPECT_THROW(deserialize_checkpoint(bytes), FormatError);
}

TEST(CheckpointTest, TruncationIsRejected) {
  auto bytes = serialize_checkpoint(train(tiny_config(model::Mode::kUnsupervised, 0)).checkpoint);
  bytes.resize(bytes.size() - 5);
  EXPECT_THROW(deserialize_checkpoint(bytes), FormatError);
}

TEST(TrainerTest, ZeroStepsReturnsInitialization) {
  const auto config = tiny_config(model::Mode::kUnsupervised, 0);
  const auto result = train(config);
  EXPECT_TRUE(result.trace.empty());
  const auto model = load_model(result.checkpoint);
  const auto init = round_to_float(model::init_params(model.arch, util::derive_seed(config.seed, 1)));
  for (const auto& [name, value] : init) EXPECT_TRUE(result.checkpoint.params.at(name) == value) << name;
}

TEST(TrainerTest, RunsAreDeterministic) {
  for (const auto mode : {model::Mode::kSupervised, model::Mode::kUnsupervised}) {
    const auto config = tiny_config(mode, 4);
    const auto a = train(config);
    const auto b = train(config);
    ASSERT_EQ(a.trace.size(), b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) EXPECT_EQ(trace_line(a.trace[i]), trace_line(b.trace[i]));
    EXPECT_EQ(serialize_checkpoint(a.checkpoint), serialize_checkpoint(b.checkpoint));
  }
}

TEST(TrainerTest, SupervisedTotalMatchesTerms) {
  const auto config = tiny_config(model::Mode::kSupervised, 3);
  for (const auto& row : train(config).trace) {
    std::vector<double> bounds, erasures;
    for (std::size_t i = 0; i < 2; ++i) {
      const auto k = std::to_string(i);
      bounds.push_back(row.term("kl/" + k) + config.weights.beta * row.term("ce/" + k));
      erasures.push_back(row.term("erase/" + k));
    }
    EXPECT_NEAR(row.total, objectives::total_supervised_loss(bounds, erasures, row.term("recon"), config.weights),
                1e-9 * std::max(1.0, std::abs(row.total)));
  }
}

TEST(TrainerTest, UnsupervisedTotalMatchesTerms) {
  const auto config = tiny_config(model::Mode::kUnsupervised, 3);
  for (const auto& row : train(config).trace) {
    std::vector<double> gen_kl, tc;
    for (std::size_t i = 0; i < 2; ++i) {
      gen_kl.push_back(row.term("gen_kl/" + std::to_string(i)));
      tc.push_back(row.term("tc/" + std::to_string(i)));
    }
    EXPECT_NEAR(row.total, objectives::total_unsupervised_loss(gen_kl, tc, row.term("recon"), config.weights),
                1e-9 * std::max(1.0, std::abs(row.total)));
  }
}

TEST(TrainerTest, TraceLineIsOrderedJson) {
  const auto row = train(tiny_config(model::Mode::kUnsupervised, 1)).trace.at(0);
  const auto line = trace_line(row);
  EXPECT_EQ(line.rfind("{\"step\":0,\"recon\":", 0), 0u) << line;
  EXPECT_THROW(row.term("nope"), ValidationError);
}

// With the adversarial terms switched off the autoencoder alone must learn.
TEST(TrainerTest, ReconstructionImprovesWithoutRegularizers) {
  auto config = tiny_config(model::Mode::kUnsupervised, 500);
  config.weights.beta = 1.0;
  config.weights.gamma = 0.0;
  const auto trace = train(config).trace;
  auto mean_recon = [&](std::size_t begin) {
    double s = 0.0;
    for (std::size_t i = begin; i < begin + 50; ++i) s += trace[i].term("recon");
    return s / 50.0;
  };
  EXPECT_LT(mean_recon(450), 0.8 * mean_recon(0));
}

TEST(TraversalTest, GridShapeAndHeader) {
  const auto config = tiny_config(model::Mode::kUnsupervised, 0);
  const auto model = load_model(train(config).checkpoint);
  const auto data = load_training_data(config);
  const auto pgm = traversal_pgm(model, data.full, 0, 7);
  const auto units = static_cast<std::int64_t>(model.arch.layout.traversal_units());
  const std::string header = "P5\n" + std::to_string(7 * 32) + " " + std::to_string(units * 32) + "\n255\n";
  ASSERT_EQ(pgm.substr(0, header.size()), header);
  EXPECT_EQ(static_cast<std::int64_t>(pgm.size() - header.size()), 7 * 32 * units * 32);
  EXPECT_THROW(traversal_pgm(model, data.full, data.full.size(), 7), ValidationError);
  EXPECT_THROW(traversal_pgm(model, data.full, 0, 1), ValidationError);
}

TEST(EvaluateTest, IdentityCodesScorePerfectly) {
  const int n = 6000;
  metrics::FactorTable table{{"a", "b"}, {3, 4}, metrics::IndexMatrix(n, 2)};
  Eigen::MatrixXd latents(n, 3);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int r = 0; r < n; ++r) {
    table.values(r, 0) = r % 3;
    table.values(r, 1) = (r / 3) % 4;
    latents(r, 0) = table.values(r, 0);
    latents(r, 1) = table.values(r, 1);
    latents(r, 2) = noise(rng);
  }
  const auto layout = model::BlockLayout::with_default_carriers({1, 1}, 1);
  const auto report = evaluate_latents(latents, layout, table, MetricOptions{}, 0.5, 1);
  report.validate();
  EXPECT_GT(report.mig, 0.98);
  EXPECT_GT(report.sap, 0.9);
  EXPECT_EQ(report.layer_kl.size(), 2u);
  for (const double kl : report.layer_kl) EXPECT_GE(kl, 0.0);
}

TEST(EvaluateTest, ModelReportIsWellFormed) {
  const auto config = tiny_config(model::Mode::kSupervised, 2);
  const auto model = load_model(train(config).checkpoint);
  const auto report = evaluate(model, load_training_data(config).heldout, 1);
  report.validate();
  EXPECT_EQ(report.layer_kl.size(), 2u);
  ASSERT_TRUE(report.s_accuracy.has_value());
  EXPECT_EQ(report.s_accuracy->size(), 2u);
  EXPECT_GE(report.z_diff, 0.0);
  EXPECT_LE(report.z_diff, 100.0);
  EXPECT_NE(report.to_json().find("\"block_mig\""), std::string::npos);
}

}  // namespace
}  // namespace bhivae::runner
