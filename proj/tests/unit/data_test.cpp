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
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include <unistd.h>

#include <gtest/gtest.h>

#include "bhivae/data/batch.hpp"
#include "bhivae/data/idx.hpp"
#include "bhivae/data/minidsprites.hpp"
#include "bhivae/errors.hpp"

namespace bhivae::data {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("bhivae_data_test_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir / name;
}

MiniDspritesOptions small_grid(std::uint64_t seed = 0) {
  MiniDspritesOptions o;
  o.factors = {{"shape", 3, FactorRole::kShape},
               {"scale", 3, FactorRole::kScale},
               {"pos_x", 4, FactorRole::kPosX},
               {"pos_y", 4, FactorRole::kPosY}};
  o.seed = seed;
  return o;
}

std::vector<std::uint8_t> file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const fs::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

TEST(MiniDsprites, FactorialCount) {
  const auto ds = gen_minidsprites(small_grid());
  EXPECT_EQ(ds.size(), 144);
  EXPECT_EQ(ds.images.cols(), 32 * 32);
  EXPECT_NO_THROW(ds.validate());
}

TEST(MiniDsprites, DeterministicPerSeed) {
  const auto a = gen_minidsprites(small_grid(5));
  const auto b = gen_minidsprites(small_grid(5));
  EXPECT_EQ(a.images, b.images);
  EXPECT_EQ(a.factors.values, b.factors.values);
  const auto c = gen_minidsprites(small_grid(6));
  EXPECT_FALSE(a.factors.values == c.factors.values);
}

TEST(MiniDsprites, CentredSquarePixelCountMatchesBruteForce) {
  MiniDspritesOptions o;
  o.factors = {{"shape", 1, FactorRole::kShape}};
  o.max_extent = 1.0;
  const auto ds = gen_minidsprites(o);
  // Half side 0.9 * 32 / 2 = 14.4 around the centre 16: count pixel centres by hand.
  int per_axis = 0;
  for (int i = 0; i < 32; ++i) per_axis += std::abs(i + 0.5 - 16.0) <= 14.4 ? 1 : 0;
  EXPECT_EQ(per_axis, 28);
  EXPECT_EQ(ds.images.matrix().sum(), per_axis * per_axis);
}

TEST(MiniDsprites, ImagesAreBinaryAndDistinct) {
  const auto ds = gen_minidsprites(small_grid());
  for (double v : ds.images.values()) EXPECT_TRUE(v == 0.0 || v == 1.0);
  std::set<std::vector<double>> seen;
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    seen.emplace(ds.images.matrix().row(i).begin(), ds.images.matrix().row(i).end());
  }
  EXPECT_EQ(seen.size(), 144u);
}

TEST(MiniDsprites, FactorColumnsAreBalanced) {
  const auto ds = gen_minidsprites(small_grid(3));
  for (std::size_t k = 0; k < ds.factors.num_factors(); ++k) {
    std::vector<int> counts(static_cast<std::size_t>(ds.factors.cardinalities[k]), 0);
    for (int v : ds.factors.column(k)) ++counts[static_cast<std::size_t>(v)];
    for (int c : counts) EXPECT_EQ(c, 144 / ds.factors.cardinalities[k]);
  }
}

TEST(MiniDsprites, GeometryFollowsFactors) {
  const auto opts = small_grid(1);
  const auto ds = gen_minidsprites(opts);
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    double mass = 0, mx = 0, my = 0;
    for (int y = 0; y < 32; ++y) {
      for (int x = 0; x < 32; ++x) {
        const double v = ds.images.matrix()(i, y * 32 + x);
        mass += v;
        mx += v * (x + 0.5);
        my += v * (y + 0.5);
      }
    }
    ASSERT_GT(mass, 0.0);
    EXPECT_NEAR(mx / mass, position_value(ds.factors.values(i, 2), 4, opts), 0.5);
    EXPECT_NEAR(my / mass, position_value(ds.factors.values(i, 3), 4, opts), 0.5);
  }
  // Area grows with scale for every shape at a fixed position.
  for (int shape = 0; shape < 3; ++shape) {
    double prev = 0;
    for (int s = 0; s < 3; ++s) {
      double area = 0;
      for (int y = 0; y < 32; ++y) {
        for (int x = 0; x < 32; ++x) area += covers(shape, 0.5 * scale_value(s, 3) * 16, 16, 16, 0.0, y, x);
      }
      EXPECT_GT(area, prev);
      prev = area;
    }
  }
}

TEST(MiniDsprites, ShapeOutsideCanvasNamesTheCombination) {
  auto o = small_grid();
  o.max_extent = 1.0;
  try {
    gen_minidsprites(o);
    FAIL() << "expected GenerationError";
  } catch (const GenerationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("pos_x="), std::string::npos) << msg;
    EXPECT_NE(msg.find("scale="), std::string::npos) << msg;
  }
}

TEST(MiniDsprites, RejectsInvalidOptions) {
  auto o = small_grid();
  o.resolution = 48;
  EXPECT_THROW(gen_minidsprites(o), ValidationError);
  o = small_grid();
  o.factors[0].cardinality = 4;
  EXPECT_THROW(gen_minidsprites(o), ValidationError);
  o = small_grid();
  o.factors[1].role = FactorRole::kShape;
  EXPECT_THROW(gen_minidsprites(o), ValidationError);
  o = small_grid();
  o.factors = {{"a", 1000, FactorRole::kPosX}, {"b", 1001, FactorRole::kPosY}};
  EXPECT_THROW(gen_minidsprites(o), ValidationError);
}

TEST(MiniDsprites, RotationIsOptional) {
  auto o = small_grid();
  o.factors.push_back({"rotation", 3, FactorRole::kRotation});
  o.max_extent = 0.35;
  const auto ds = gen_minidsprites(o);
  EXPECT_EQ(ds.size(), 432);
  for (double v : ds.images.values()) EXPECT_TRUE(v == 0.0 || v == 1.0);
}

TEST(Idx, RoundTripIsBitExact) {
  std::mt19937_64 rng(3);
  IdxTensor t{{7, 5, 3}, {}};
  for (int i = 0; i < 105; ++i) t.data.push_back(static_cast<std::uint8_t>(rng()));
  const auto p = scratch("rt.idx");
  write_idx(p, t);
  const auto bytes = file_bytes(p);
  ASSERT_EQ(bytes.size(), 16u + 105u);
  EXPECT_EQ(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 4), (std::vector<std::uint8_t>{0, 0, 8, 3}));
  const auto back = read_idx(p, 3);
  EXPECT_EQ(back.dims, t.dims);
  EXPECT_EQ(back.data, t.data);
  const auto q = scratch("rt2.idx");
  write_idx(q, back);
  EXPECT_EQ(file_bytes(q), bytes);
}

TEST(Idx, LoadsImagesAndScalesPixels) {
  IdxTensor img{{10, 28, 28}, std::vector<std::uint8_t>(7840, 0)};
  img.data[0] = 255;
  img.data[1] = 51;
  const auto ip = scratch("img.idx");
  const auto lp = scratch("lab.idx");
  write_idx(ip, img);
  const std::vector<int> labels{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  write_idx_labels(lp, labels);
  const auto ds = load_idx(ip, lp);
  EXPECT_EQ(ds.size(), 10);
  EXPECT_EQ(ds.images.cols(), 784);
  EXPECT_EQ(ds.images.values()[0], 1.0);
  EXPECT_EQ(ds.images.values()[1], 0.2);
  EXPECT_EQ(ds.images.values()[2], 0.0);
  EXPECT_EQ(ds.labels("label"), labels);
  EXPECT_EQ(ds.factors.cardinalities[0], 10);
}

TEST(Idx, FormatErrorsCarryByteOffsets) {
  const auto p = scratch("bad.idx");
  write_bytes(p, {0, 0, 8, 1, 0, 0, 0, 1, 0});
  try {
    read_idx(p, 3);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("byte 0"), std::string::npos) << e.what();
  }
  write_bytes(p, {0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 2, 1, 2, 3});
  try {
    read_idx(p, 3);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("byte 19"), std::string::npos) << e.what();
  }
  write_bytes(p, {0, 0, 8});
  EXPECT_THROW(read_idx(p, 1), FormatError);

  const auto ip = scratch("img3.idx");
  write_idx(ip, IdxTensor{{3, 2, 2}, std::vector<std::uint8_t>(12, 0)});
  const auto lp = scratch("lab2.idx");
  write_idx_labels(lp, std::vector<int>{1, 2});
  try {
    load_idx(ip, lp);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("byte 4"), std::string::npos) << e.what();
  }
  EXPECT_THROW(load_idx(scratch("missing.idx")), FormatError);
}

TEST(Idx, DatasetDirectoryRoundTrip) {
  const auto ds = gen_minidsprites(small_grid(2));
  const auto dir = scratch("dsdir");
  save_dataset_dir(dir, ds);
  const auto back = load_dataset_dir(dir);
  EXPECT_EQ(back.images, ds.images);
  EXPECT_EQ(back.factors.values, ds.factors.values);
  EXPECT_EQ(back.factors.names, ds.factors.names);
  EXPECT_EQ(back.factors.cardinalities, ds.factors.cardinalities);
  EXPECT_EQ(back.roles, ds.roles);
}

Dataset tiny(std::int64_t n) {
  Dataset ds;
  ds.height = 1;
  ds.width = 1;
  ds.images = Array({n, 1});
  ds.factors = {{"id"}, {static_cast<int>(n)}, metrics::IndexMatrix(n, 1)};
  ds.roles = {FactorRole::kLabel};
  for (std::int64_t i = 0; i < n; ++i) {
    ds.images.matrix()(i, 0) = static_cast<double>(i) / static_cast<double>(n);
    ds.factors.values(i, 0) = static_cast<int>(i);
  }
  return ds;
}

TEST(BatchIterator, DropsTheShortTail) {
  const auto ds = tiny(10);
  BatchIterator it(ds, 3, 1);
  EXPECT_EQ(it.batches_per_epoch(), 3);
  std::set<std::int64_t> seen;
  for (int b = 0; b < 3; ++b) {
    const auto batch = it.next();
    EXPECT_EQ(batch.epoch, 0);
    for (std::int64_t i = 0; i < 3; ++i) {
      const auto r = batch.rows[static_cast<std::size_t>(i)];
      EXPECT_EQ(batch.factors(i, 0), r);
      EXPECT_EQ(batch.images.matrix()(i, 0), ds.images.matrix()(r, 0));
      seen.insert(r);
    }
  }
  const auto order = it.epoch_order(0);
  seen.insert(order.back());
  EXPECT_EQ(seen.size(), 10u);
  EXPECT_EQ(it.next().epoch, 1);
}

TEST(BatchIterator, DeterministicAndEpochDependent) {
  const auto ds = tiny(50);
  BatchIterator a(ds, 8, 4);
  BatchIterator b(ds, 8, 4);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(a.next().rows, b.next().rows);
  EXPECT_NE(a.epoch_order(0), a.epoch_order(1));
  BatchIterator c(ds, 8, 5);
  EXPECT_NE(c.epoch_order(0), a.epoch_order(0));
}

TEST(BatchIterator, RejectsOversizedBatches) {
  const auto ds = tiny(5);
  EXPECT_THROW(BatchIterator(ds, 6, 0), ValidationError);
  EXPECT_THROW(BatchIterator(ds, 0, 0), ValidationError);
}

TEST(Replicate, RepeatsRowsInOrder) {
  const auto ds = tiny(4);
  const auto big = replicate(ds, 10);
  EXPECT_EQ(big.size(), 12);
  for (std::int64_t i = 0; i < 12; ++i) EXPECT_EQ(big.factors.values(i, 0), i % 4);
}

}  // namespace
}  // namespace bhivae::data
