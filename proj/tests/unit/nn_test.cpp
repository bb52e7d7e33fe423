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
#include <random>

#include <gtest/gtest.h>

#include "bhivae/errors.hpp"
#include "bhivae/nn/layers.hpp"

namespace bhivae::nn {
namespace {

using ndgrad::Bindings;
using ndgrad::Graph;
using ndgrad::Shape;

TEST(InitMlp, DeterministicPerSeedAndDistinctAcrossSeeds) {
  MlpSpec spec{{4, 3}};
  auto a = init_mlp(spec, 7);
  auto b = init_mlp(spec, 7);
  auto c = init_mlp(spec, 8);
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0].weight, b[0].weight);
  EXPECT_FALSE(a[0].weight == c[0].weight);
}

TEST(InitMlp, GlorotBoundAndZeroBias) {
  const double bound = glorot_bound(4, 3);
  EXPECT_NEAR(bound, 0.9258201, 1e-7);  // sqrt(6/7)
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto layers = init_mlp(MlpSpec{{4, 3}}, seed);
    for (double w : layers[0].weight.values()) {
      EXPECT_LE(std::abs(w), bound);
    }
    for (double b : layers[0].bias.values()) EXPECT_EQ(b, 0.0);
  }
}

TEST(InitMlp, RejectsDegenerateSpecs) {
  EXPECT_THROW(init_mlp(MlpSpec{{4}}, 0), ValidationError);
  EXPECT_THROW(init_mlp(MlpSpec{{4, 0}}, 0), ValidationError);
}

TEST(MlpForward, ZeroWeightsGiveTheBias) {
  MlpSpec spec{{3, 2}};
  std::vector<DenseParams> layers{{Array({3, 2}), Array({2}, {1.5, -2.0})}};
  auto y = mlp_forward(layers, Array({2, 3}, {1, 2, 3, 4, 5, 6}), spec);
  EXPECT_EQ(y, Array({2, 2}, {1.5, -2.0, 1.5, -2.0}));
}

TEST(MlpForward, IdentityLayerPassesInputThrough) {
  MlpSpec spec{{3, 3}};
  Array eye({3, 3});
  eye.matrix().setIdentity();
  std::vector<DenseParams> layers{{eye, Array({3})}};
  Array x({2, 3}, {0.5, -1, 2, 3, 4, -5});
  EXPECT_EQ(mlp_forward(layers, x, spec), x);
}

TEST(MlpForward, SigmoidOutputStaysInUnitInterval) {
  MlpSpec spec{{5, 16, 4}, Activation::kRelu, Activation::kSigmoid};
  auto layers = init_mlp(spec, 3);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 3.0);
  Array x({8, 5});
  for (auto& v : x.values()) v = n(rng);
  for (double v : mlp_forward(layers, x, spec).values()) {
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
}

TEST(MlpForward, WidthMismatchIsRejected) {
  MlpSpec spec{{3, 2}};
  auto layers = init_mlp(spec, 0);
  EXPECT_THROW(mlp_forward(layers, Array({1, 4}), spec), ValidationError);
}

TEST(CrossEntropy, KnownValues) {
  std::vector<int> labels{3};
  EXPECT_NEAR(softmax_cross_entropy(Array::filled({1, 10}, 0.2), labels), std::log(10.0), 1e-12);
  std::vector<int> zero{0};
  EXPECT_NEAR(softmax_cross_entropy(Array({1, 2}, {1.0, 1.0}), zero), 0.6931471805599453, 1e-12);
  EXPECT_LT(softmax_cross_entropy(Array({1, 3}, {60.0, 0.0, 0.0}), zero), 1e-20);
}

TEST(CrossEntropy, OutOfRangeLabel) {
  std::vector<int> labels{2};
  EXPECT_THROW(softmax_cross_entropy(Array({1, 2}), labels), ValidationError);
  std::vector<int> negative{-1};
  EXPECT_THROW(softmax_cross_entropy(Array({1, 2}), negative), ValidationError);
}

TEST(CrossEntropy, DecreasesAsCorrectLogitGrows) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    Array logits({1, 4});
    for (auto& v : logits.values()) v = u(rng);
    std::vector<int> y{trial % 4};
    double prev = softmax_cross_entropy(logits, y);
    EXPECT_GE(prev, 0.0);
    for (int step = 0; step < 10; ++step) {
      logits.matrix()(0, y[0]) += 0.5;
      const double next = softmax_cross_entropy(logits, y);
      EXPECT_LT(next, prev);
      prev = next;
    }
  }
}

TEST(PredictiveEntropy, KnownValues) {
  EXPECT_NEAR(predictive_entropy(Array::filled({2, 3}, -0.4)), std::log(3.0), 1e-12);
  EXPECT_LT(predictive_entropy(Array({1, 3}, {50.0, 0.0, 0.0})), 1e-18);
  // p = (0.75, 0.25)
  EXPECT_NEAR(predictive_entropy(Array({1, 2}, {std::log(3.0), 0.0})), 0.5623351446188083, 1e-12);
  EXPECT_THROW(predictive_entropy(Array({1, 1})), ValidationError);
}

TEST(PredictiveEntropy, BoundedByLogClassCount) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::int64_t n = 2 + trial % 6;
    Array logits({3, n});
    for (auto& v : logits.values()) v = u(rng);
    EXPECT_LE(predictive_entropy(logits), std::log(static_cast<double>(n)) + 1e-12);
  }
  EXPECT_NEAR(predictive_entropy(Array::filled({1, 7}, 1.0)), std::log(7.0), 1e-9);
}

TEST(Gradients, LossesMatchCentralDifferences) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    MlpSpec spec{{3, 6, 4}, trial % 2 ? Activation::kTanh : Activation::kRelu};
    auto layers = init_mlp(spec, trial);
    Graph g;
    Bindings b;
    ParamStore store;
    store_mlp(store, "m", layers);
    auto nodes = declare(g, store);
    bind(b, store);
    auto x = g.input("x", {5, 3});
    Array xv({5, 3});
    for (auto& v : xv.values()) v = u(rng);
    b.set("x", xv);
    std::vector<int> labels{0, 1, 2, 3, 1};
    auto y = g.input("y", {5, 4});
    b.set("y", one_hot(labels, 4));
    auto logits = mlp(g, mlp_nodes(nodes, "m", spec), x, spec);
    auto loss = g.add(softmax_cross_entropy(g, logits, y), g.scale(predictive_entropy(g, logits), 0.7));
    std::vector<NodeId> wrt;
    for (const auto& [_, id] : nodes) wrt.push_back(id);
    EXPECT_LT(ndgrad::finite_difference_check(g, loss, b, 1e-5, wrt), 1e-4) << "trial " << trial;
  }
}

}  // namespace
}  // namespace bhivae::nn
