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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "bhivae/errors.hpp"
#include "bhivae/model/layout.hpp"
#include "bhivae/objectives/losses.hpp"
#include "bhivae/objectives/prior.hpp"
#include "gradient_cases.hpp"

namespace bhivae::objectives {
namespace {

using ndgrad::Bindings;
using ndgrad::Shape;

const double kLn3 = std::log(3.0);

// Bivariate standard-normal log density with correlation rho, written out by hand.
double log_bivariate(double x, double y, double rho) {
  const double q = 1.0 - rho * rho;
  return -std::log(2.0 * std::numbers::pi) - 0.5 * std::log(q) - (x * x - 2.0 * rho * x * y + y * y) / (2.0 * q);
}

double log_std_normal(double x) { return -0.5 * std::log(2.0 * std::numbers::pi) - 0.5 * x * x; }

// 0.5 (tr(Sigma^-1) - 2 + ln det Sigma) for one 2x2 block, using the explicit inverse.
double block_kl_oracle(double rho) {
  const double det = 1.0 - rho * rho;
  return 0.5 * (2.0 / det - 2.0 + std::log(det));
}

Array random_array(Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Array a(std::move(shape));
  for (auto& v : a.values()) v = u(rng);
  return a;
}

double correlation(const Array& z, Eigen::Index a, Eigen::Index b) {
  const auto& m = z.matrix();
  const double ma = m.col(a).mean();
  const double mb = m.col(b).mean();
  const auto da = (m.col(a).array() - ma).matrix();
  const auto db = (m.col(b).array() - mb).matrix();
  return da.dot(db) / std::sqrt(da.squaredNorm() * db.squaredNorm());
}

model::BlockLayout layout_222() { return model::BlockLayout::with_default_carriers({2, 2, 2}, 4); }

TEST(KlDiagGaussian, ClosedFormValues) {
  EXPECT_NEAR(kl_diag_gaussian_to_standard(Array({1, 3}), Array({1, 3})), 0.0, 1e-15);
  EXPECT_NEAR(kl_diag_gaussian_to_standard(Array({1, 1}, {1.0}), Array({1, 1}, {0.0})), 0.5, 1e-15);
  EXPECT_NEAR(kl_diag_gaussian_to_standard(Array({1, 1}, {0.0}), Array({1, 1}, {std::log(2.0)})),
              0.5 * (2.0 - std::log(2.0) - 1.0), 1e-12);
}

TEST(KlDiagGaussian, AveragesOverBatchAndSumsOverDims) {
  // Rows: (1, 0) -> 0.5 ; (1, 1) -> 1.0 ; mean 0.75.
  EXPECT_NEAR(kl_diag_gaussian_to_standard(Array({2, 2}, {1, 0, 1, 1}), Array({2, 2})), 0.75, 1e-15);
}

TEST(KlDiagGaussian, NonNegativeAndZeroOnlyAtStandard) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto mu = random_array({3, 4}, rng, -2.0, 2.0);
    const auto lv = random_array({3, 4}, rng, -2.0, 2.0);
    const double kl = kl_diag_gaussian_to_standard(mu, lv);
    EXPECT_GT(kl, 1e-10);
  }
}

TEST(BlockPrior, CovarianceStructure) {
  const auto prior = BlockPrior::for_code(layout_222(), 0.5);
  ASSERT_EQ(prior.dim(), 10);
  const auto& s = prior.covariance();
  for (int b = 0; b < 3; ++b) {
    EXPECT_EQ(s(2 * b, 2 * b), 1.0);
    EXPECT_EQ(s(2 * b, 2 * b + 1), 0.5);
    EXPECT_EQ(s(2 * b + 1, 2 * b), 0.5);
  }
  EXPECT_EQ(s(1, 2), 0.0);
  EXPECT_TRUE(s.block(6, 6, 4, 4).isIdentity());
  const Eigen::MatrixXd rebuilt = prior.cholesky_factor() * prior.cholesky_factor().transpose();
  EXPECT_LT((rebuilt - s).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(BlockPrior, LayerPriorCorrelatesOnlyTheFeatureBlock) {
  const auto layout = layout_222();
  const auto p0 = BlockPrior::for_layer(layout, 0, 0.5);
  EXPECT_EQ(p0.dim(), 2 + layout.carrier_width(0));
  EXPECT_EQ(p0.covariance()(0, 1), 0.5);
  EXPECT_EQ(p0.covariance()(2, 3), 0.0);
}

TEST(BlockPrior, RejectsInvalidCorrelation) {
  EXPECT_THROW(BlockPrior({{2, 1.0}}), ValidationError);
  EXPECT_THROW(BlockPrior({{2, -1.5}}), ValidationError);
  EXPECT_THROW(BlockPrior({{0, 0.5}}), ValidationError);
  // Equicorrelation with rho < -1/(k-1) is not positive definite.
  EXPECT_THROW(BlockPrior({{3, -0.9}}), NumericalError);
}

TEST(KlToBlockPrior, ClosedFormValues) {
  EXPECT_NEAR(kl_standard_to_block_prior(BlockPrior({{2, 0.0}, {3, 0.0}})), 0.0, 1e-14);
  const double one = block_kl_oracle(0.5);
  EXPECT_NEAR(one, 0.18949, 1e-5);
  EXPECT_NEAR(kl_standard_to_block_prior(BlockPrior({{2, 0.5}})), one, 1e-12);
  EXPECT_NEAR(kl_standard_to_block_prior(BlockPrior({{2, 0.5}, {2, 0.5}, {2, 0.5}})), 3.0 * one, 1e-12);
  EXPECT_NEAR(3.0 * one, 0.56847, 1e-5);
}

TEST(KlToBlockPrior, MatchesMonteCarloLogRatio) {
  for (double rho : {0.0, 0.3, 0.5, 0.8}) {
    std::mt19937_64 rng(1234);
    std::normal_distribution<double> n01;
    const int n = 1'000'000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = n01(rng);
      const double y = n01(rng);
      sum += log_std_normal(x) + log_std_normal(y) - log_bivariate(x, y, rho);
    }
    EXPECT_NEAR(sum / n, kl_standard_to_block_prior(BlockPrior({{2, rho}})), 0.005) << "rho " << rho;
  }
}

TEST(SamplePrior, DeterministicPerSeed) {
  const BlockPrior prior({{2, 0.5}, {1, 0.0}});
  EXPECT_EQ(sample_prior(prior, 50, 3), sample_prior(prior, 50, 3));
  EXPECT_FALSE(sample_prior(prior, 50, 3) == sample_prior(prior, 50, 4));
  EXPECT_THROW(sample_prior(prior, 0, 3), ValidationError);
}

TEST(SamplePrior, EmpiricalCorrelationsConverge) {
  const BlockPrior prior({{2, 0.5}, {2, 0.0}});
  const auto z = sample_prior(prior, 100000, 9);
  EXPECT_NEAR(correlation(z, 0, 1), 0.5, 0.01);
  EXPECT_NEAR(correlation(z, 2, 3), 0.0, 0.01);
  EXPECT_NEAR(correlation(z, 1, 2), 0.0, 0.01);
}

TEST(GaussianFitKl, RecoversClosedForms) {
  const BlockPrior prior({{2, 0.5}});
  EXPECT_NEAR(gaussian_fit_kl(sample_prior(prior, 100000, 1).matrix(), prior), 0.0, 0.005);
  const auto white = sample_prior(BlockPrior({{2, 0.0}}), 100000, 2);
  EXPECT_NEAR(gaussian_fit_kl(white.matrix(), prior), block_kl_oracle(0.5), 0.01);
  EXPECT_THROW(gaussian_fit_kl(white.matrix().leftCols(1), prior), ValidationError);
}

TEST(Reconstruction, KnownValues) {
  EXPECT_NEAR(reconstruction_loss(Array({1, 4}, {0, 1, 1, 0}), Array({1, 4}, {0, 1, 1, 0})), 0.0, 1e-5);
  EXPECT_NEAR(reconstruction_loss(Array({2, 3}, {0, 1, 1, 0, 0, 1}), Array::filled({2, 3}, 0.5)),
              3.0 * std::log(2.0), 1e-12);
  EXPECT_NEAR(reconstruction_loss(Array({1, 1}, {1.0}), Array({1, 1}, {0.9})), -std::log(0.9), 1e-12);
  EXPECT_NEAR(-std::log(0.9), 0.1054, 1e-4);
}

TEST(Reconstruction, ClampsSaturatedPredictions) {
  const double v = reconstruction_loss(Array({1, 1}, {1.0}), Array({1, 1}, {0.0}));
  EXPECT_NEAR(v, -std::log(1e-6), 1e-9);
}

TEST(Reconstruction, ShapeMismatch) {
  EXPECT_THROW(reconstruction_loss(Array({1, 3}), Array({1, 4})), ValidationError);
}

TEST(SupervisedLayerLoss, UniformClassifierGivesBetaLogN) {
  // Zero weights make the classifier output uniform over 3 classes.
  nn::Mlp cls{nn::MlpSpec{{2, 3}}, {{Array({2, 3}), Array({3})}}};
  const std::vector<int> labels{0, 1, 2, 1};
  const Array mu({4, 2});
  const Array lv({4, 2});
  std::mt19937_64 rng(5);
  const auto s = random_array({4, 2}, rng);
  EXPECT_NEAR(supervised_layer_loss(mu, lv, s, labels, cls, 10.0), 10.0 * kLn3, 1e-12);
  EXPECT_NEAR(10.0 * kLn3, 10.986, 1e-3);
}

TEST(SupervisedLayerLoss, ZeroBetaIsPureKl) {
  std::mt19937_64 rng(3);
  auto cls = nn::Mlp::init(nn::MlpSpec{{2, 4, 3}}, 1);
  const auto mu = random_array({5, 2}, rng);
  const auto lv = random_array({5, 2}, rng);
  const auto s = random_array({5, 2}, rng);
  const std::vector<int> labels{0, 1, 2, 0, 1};
  EXPECT_DOUBLE_EQ(supervised_layer_loss(mu, lv, s, labels, cls, 0.0), kl_diag_gaussian_to_standard(mu, lv));
}

TEST(SupervisedLayerLoss, ConfidentClassifierApproachesZero) {
  nn::Mlp cls{nn::MlpSpec{{1, 2}}, {{Array({1, 2}, {-50.0, 50.0}), Array({2})}}};
  const std::vector<int> labels{1};
  EXPECT_LT(supervised_layer_loss(Array({1, 1}), Array({1, 1}), Array({1, 1}, {1.0}), labels, cls, 10.0), 1e-12);
}

TEST(MaxEntropyErasure, UniformAndConfidentExtremes) {
  nn::Mlp proj{nn::MlpSpec{{4, 2}}, {{Array({4, 2}), Array({2})}}};
  nn::Mlp uniform{nn::MlpSpec{{2, 3}}, {{Array({2, 3}), Array({3})}}};
  std::mt19937_64 rng(4);
  const auto h = random_array({6, 4}, rng);
  EXPECT_NEAR(max_entropy_erasure(h, uniform, proj), -kLn3, 1e-12);
  nn::Mlp confident{nn::MlpSpec{{2, 3}}, {{Array({2, 3}), Array({3}, {60.0, 0.0, 0.0})}}};
  EXPECT_NEAR(max_entropy_erasure(h, confident, proj), 0.0, 1e-20);
}

TEST(MaxEntropyErasure, BoundedByLogClassCount) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    auto proj = nn::Mlp::init(nn::MlpSpec{{5, 2}}, rng());
    auto cls = nn::Mlp::init(nn::MlpSpec{{2, 8, 4}}, rng());
    const auto h = random_array({7, 5}, rng, -3.0, 3.0);
    const double e = max_entropy_erasure(h, cls, proj);
    EXPECT_GE(e, -std::log(4.0) - 1e-12);
    EXPECT_LE(e, 0.0);
  }
}

TEST(MaxEntropyErasure, NoGradientReachesClassifierOrProjection) {
  std::mt19937_64 rng(12);
  auto proj = nn::Mlp::init(nn::MlpSpec{{4, 2}}, 1);
  auto cls = nn::Mlp::init(nn::MlpSpec{{2, 5, 3}}, 2);
  Graph g;
  Bindings b;
  const auto pn = proj.declare(g, b, "proj");
  const auto cn = cls.declare(g, b, "cls");
  const NodeId h = g.input("h", {3, 4});
  b.set("h", random_array({3, 4}, rng));
  const NodeId loss = max_entropy_erasure(g, h, cn, cls.spec, pn, proj.spec);
  std::vector<NodeId> wrt{h};
  for (const auto& l : pn) wrt.insert(wrt.end(), {l.weight, l.bias});
  for (const auto& l : cn) wrt.insert(wrt.end(), {l.weight, l.bias});
  const auto ev = ndgrad::evaluate(g, b);
  const auto grads = ndgrad::gradients(ev, loss, wrt);
  ASSERT_TRUE(grads.contains(h));
  EXPECT_GT(grads.at(h).matrix().cwiseAbs().maxCoeff(), 0.0);
  for (std::size_t i = 1; i < wrt.size(); ++i) {
    if (!grads.contains(wrt[i])) continue;
    EXPECT_EQ(grads.at(wrt[i]).matrix().cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(MaxEntropyErasure, WidthMismatch) {
  auto proj = nn::Mlp::init(nn::MlpSpec{{4, 3}}, 1);
  auto cls = nn::Mlp::init(nn::MlpSpec{{2, 3}}, 2);
  EXPECT_THROW(max_entropy_erasure(Array({1, 4}), cls, proj), ValidationError);
}

TEST(TotalLosses, SupervisedArithmetic) {
  const LossWeights w{10.0, 3.0};
  const std::vector<double> v{0.7, 0.7, 0.7};
  const std::vector<double> e{-0.4, -0.4, -0.4};
  EXPECT_NEAR(total_supervised_loss(v, e, 0.0, w), 3.0 * (0.7 + 3.0 * -0.4), 1e-12);
  EXPECT_NEAR(total_supervised_loss(v, e, 0.0, {10.0, 0.0}), 2.1, 1e-12);
  // One layer at both minima: KL 0, CE 0, erasure -ln 3.
  const std::vector<double> one{0.0};
  const std::vector<double> floor{-kLn3};
  EXPECT_NEAR(total_supervised_loss(one, floor, 0.25, w), -3.0 * kLn3 + 2.5, 1e-12);
  EXPECT_THROW(total_supervised_loss(one, e, 0.0, w), ValidationError);
  EXPECT_THROW(total_supervised_loss(one, floor, 0.0, {-1.0, 3.0}), ValidationError);
}

TEST(TotalLosses, UnsupervisedArithmetic) {
  const std::vector<double> kl{0.02, 0.03};
  const std::vector<double> tc{0.004, 0.006};
  EXPECT_NEAR(total_unsupervised_loss(kl, tc, 0.2, {10.0, 3.0}), 2.08, 1e-12);
  const std::vector<double> zeros{0.0, 0.0};
  EXPECT_NEAR(total_unsupervised_loss(zeros, tc, 0.2, {10.0, 0.0}), 2.0, 1e-12);
}

TEST(TotalLosses, GraphFormsMatchDirectForms) {
  Graph g;
  std::vector<NodeId> a, c;
  Bindings b;
  const std::vector<double> av{0.3, 1.2}, cv{-0.5, 0.1};
  for (int i = 0; i < 2; ++i) {
    a.push_back(g.input("a" + std::to_string(i), {}));
    c.push_back(g.input("c" + std::to_string(i), {}));
    b.set("a" + std::to_string(i), Array::scalar(av[i]));
    b.set("c" + std::to_string(i), Array::scalar(cv[i]));
  }
  const NodeId r = g.input("r", {});
  b.set("r", Array::scalar(0.4));
  const LossWeights w{10.0, 3.0};
  const NodeId sup = total_supervised_loss(g, a, c, r, w);
  const NodeId uns = total_unsupervised_loss(g, a, c, r, w);
  const auto ev = ndgrad::evaluate(g, b);
  EXPECT_NEAR(ev.scalar(sup), total_supervised_loss(av, cv, 0.4, w), 1e-12);
  EXPECT_NEAR(ev.scalar(uns), total_unsupervised_loss(av, cv, 0.4, w), 1e-12);
}

TEST(PermuteJoint, TwoRowSwap) {
  const Array s({2, 1}, {1.0, 2.0});
  const Array h({2, 1}, {10.0, 20.0});
  bool seen_swap = false;
  for (std::uint64_t seed = 0; seed < 64 && !seen_swap; ++seed) {
    const auto out = permute_joint(s, h, seed);
    if (out.matrix()(0, 0) == 1.0 && out.matrix()(0, 1) == 20.0) {
      seen_swap = true;
      EXPECT_EQ(out.matrix()(1, 0), 2.0);
      EXPECT_EQ(out.matrix()(1, 1), 10.0);
    }
  }
  EXPECT_TRUE(seen_swap);
}

TEST(PermuteJoint, PreservesMarginalMultisets) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const std::int64_t n = 2 + static_cast<std::int64_t>(rng() % 30);
    const auto s = random_array({n, 2}, rng);
    const auto h = random_array({n, 3}, rng);
    const auto out = permute_joint(s, h, rng());
    auto rows = [](const ndgrad::Matrix& m) {
      std::vector<std::vector<double>> r;
      for (Eigen::Index i = 0; i < m.rows(); ++i) r.emplace_back(m.row(i).begin(), m.row(i).end());
      std::sort(r.begin(), r.end());
      return r;
    };
    EXPECT_EQ(rows(out.matrix().leftCols(2)), rows(s.matrix()));
    EXPECT_EQ(rows(out.matrix().rightCols(3)), rows(h.matrix()));
  }
}

TEST(PermuteJoint, DestroysCrossCorrelation) {
  const auto z = sample_prior(BlockPrior({{2, 0.5}}), 10000, 5);
  const Array s = Array::from_matrix(z.matrix().leftCols(1));
  const Array h = Array::from_matrix(z.matrix().rightCols(1));
  const auto out = permute_joint(s, h, 77);
  EXPECT_NEAR(correlation(out, 0, 1), 0.0, 0.03);
}

TEST(PermuteJoint, Errors) {
  EXPECT_THROW(permute_joint(Array({1, 2}), Array({1, 2}), 0), ValidationError);
  EXPECT_THROW(permute_joint(Array({3, 2}), Array({4, 2}), 0), ValidationError);
}

TEST(RandomPermutation, IsAPermutation) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto p = random_permutation(17, seed);
    std::sort(p.begin(), p.end());
    for (std::int64_t i = 0; i < 17; ++i) EXPECT_EQ(p[static_cast<std::size_t>(i)], i);
  }
}

ProbabilityFn constant_probability(double p) {
  return [p](const Array& z) { return Array::filled({z.rows(), 1}, p); };
}

TEST(TcEstimate, ConstantDiscriminators) {
  const Array z({8, 2});
  EXPECT_NEAR(tc_estimate(constant_probability(0.5), z), 0.0, 1e-15);
  const double p = 1.0 / (1.0 + std::exp(-1.0));
  EXPECT_NEAR(tc_estimate(constant_probability(p), z), 1.0, 1e-12);
}

TEST(TcEstimate, OptimalDiscriminatorRecoversGaussianMi) {
  const double rho = 0.5;
  const auto z = sample_prior(BlockPrior({{2, rho}}), 100000, 31);
  const ProbabilityFn optimal = [rho](const Array& batch) {
    Array out({batch.rows(), 1});
    for (Eigen::Index i = 0; i < batch.rows(); ++i) {
      const double x = batch.matrix()(i, 0);
      const double y = batch.matrix()(i, 1);
      const double log_ratio = log_bivariate(x, y, rho) - log_std_normal(x) - log_std_normal(y);
      out.matrix()(i, 0) = 1.0 / (1.0 + std::exp(-log_ratio));
    }
    return out;
  };
  const double mi = -0.5 * std::log(1.0 - rho * rho);
  EXPECT_NEAR(mi, 0.14384, 1e-5);
  EXPECT_NEAR(tc_estimate(optimal, z), mi, 0.05 * mi);
}

TEST(TcEstimate, ContractViolations) {
  const Array z({4, 2});
  EXPECT_THROW(tc_estimate(constant_probability(1.5), z), ContractError);
  EXPECT_THROW(tc_estimate(constant_probability(-0.1), z), ContractError);
  EXPECT_THROW(tc_estimate(constant_probability(std::nan("")), z), ContractError);
  EXPECT_THROW(tc_estimate([](const Array&) { return Array({3, 1}); }, z), ContractError);
  EXPECT_NEAR(tc_estimate(constant_probability(1.0), z), std::log((1.0 - 1e-6) / 1e-6), 1e-9);
}

TEST(DiscriminatorLosses, IndistinguishableClasses) {
  const LogitFn flat = [](const Array& z) { return Array::filled({z.rows(), 3}, 0.7); };
  const Array z({5, 2});
  const auto t = discriminator_losses(flat, z, z, z);
  EXPECT_NEAR(t.disc_loss, kLn3, 1e-12);
  EXPECT_NEAR(t.gen_kl, 0.0, 1e-15);
  EXPECT_NEAR(t.tc, 0.0, 1e-15);
}

TEST(DiscriminatorLosses, OptimalLogitsRecoverGaussianOracles) {
  // Posterior = prior = N(0, Sigma_rho); permuted = N(0, I). With equal class
  // priors the Bayes-optimal logits are the three log densities.
  const double rho = 0.5;
  const LogitFn optimal = [rho](const Array& batch) {
    Array out({batch.rows(), 3});
    for (Eigen::Index i = 0; i < batch.rows(); ++i) {
      const double x = batch.matrix()(i, 0);
      const double y = batch.matrix()(i, 1);
      const double joint = log_bivariate(x, y, rho);
      out.matrix()(i, 0) = joint;
      out.matrix()(i, 1) = joint;
      out.matrix()(i, 2) = log_std_normal(x) + log_std_normal(y);
    }
    return out;
  };
  const BlockPrior prior({{2, rho}});
  const auto post = sample_prior(prior, 100000, 1);
  const auto prior_z = sample_prior(prior, 100000, 2);
  const auto perm = sample_prior(BlockPrior({{2, 0.0}}), 100000, 3);
  const auto t = discriminator_losses(optimal, post, prior_z, perm);
  EXPECT_NEAR(t.gen_kl, 0.0, 1e-15);
  EXPECT_NEAR(t.tc, -0.5 * std::log(1.0 - rho * rho), 0.02 * 0.14384);
  EXPECT_LT(t.disc_loss, kLn3);
}

TEST(DiscriminatorLosses, RejectsBadLogitShapes) {
  Graph g;
  const NodeId a = g.input("a", {4, 2});
  EXPECT_THROW(discriminator_losses(g, a, a, a), ValidationError);
  EXPECT_THROW(constant_class_cross_entropy(g, a, 2), ValidationError);
}

TEST(LossGradients, EveryLossMatchesCentralDifferences) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    for (const auto& c : testing::check_loss_instance(rng)) {
      EXPECT_LT(c.error, 1e-4) << "trial " << trial << " loss " << c.name;
    }
  }
}

}  // namespace
}  // namespace bhivae::objectives
