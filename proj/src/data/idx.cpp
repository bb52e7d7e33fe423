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

#include "bhivae/data/idx.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "bhivae/errors.hpp"

namespace bhivae::data {
namespace {

using nlohmann::json;

std::string hex(std::uint32_t v) {
  std::ostringstream s;
  s << "0x" << std::hex << std::uppercase;
  s.width(8);
  s.fill('0');
  s << v;
  return s.str();
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string() + ": cannot open");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes, std::size_t offset, const std::filesystem::path& path) {
  if (offset + 4 > bytes.size()) {
    throw FormatError(path.string() + ": truncated header at byte " + std::to_string(bytes.size()) + ", expected " +
                      std::to_string(offset + 4) + " bytes");
  }
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void put_be32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                     static_cast<char>(v)};
  out.write(b, 4);
}

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); }

}  // namespace

IdxTensor read_idx(const std::filesystem::path& path, std::size_t expected_dims) {
  const auto bytes = read_bytes(path);
  const std::uint32_t magic = read_be32(bytes, 0, path);
  const std::uint32_t expected = 0x00000800u | static_cast<std::uint32_t>(expected_dims);
  if (magic != expected) {
    throw FormatError(path.string() + ": bad magic " + hex(magic) + " at byte 0, expected " + hex(expected));
  }
  IdxTensor t;
  std::size_t count = 1;
  for (std::size_t d = 0; d < expected_dims; ++d) {
    t.dims.push_back(read_be32(bytes, 4 + 4 * d, path));
    count *= t.dims.back();
  }
  const std::size_t header = 4 + 4 * expected_dims;
  if (bytes.size() < header + count) {
    throw FormatError(path.string() + ": truncated payload at byte " + std::to_string(bytes.size()) +
                      ", expected " + std::to_string(header + count) + " bytes");
  }
  if (bytes.size() > header + count) {
    throw FormatError(path.string() + ": unexpected trailing data at byte " + std::to_string(header + count));
  }
  t.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(header), bytes.end());
  return t;
}

void write_idx(const std::filesystem::path& path, const IdxTensor& tensor) {
  std::size_t count = 1;
  for (auto d : tensor.dims) count *= d;
  if (tensor.dims.empty() || tensor.dims.size() > 255 || count != tensor.data.size()) {
    throw ValidationError("IDX tensor dims do not match its payload");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError(path.string() + ": cannot open for writing");
  put_be32(out, 0x00000800u | static_cast<std::uint32_t>(tensor.dims.size()));
  for (auto d : tensor.dims) put_be32(out, d);
  out.write(reinterpret_cast<const char*>(tensor.data.data()), static_cast<std::streamsize>(tensor.data.size()));
  if (!out) throw FormatError(path.string() + ": write failed");
}

Dataset load_idx(const std::filesystem::path& images_path, const std::optional<std::filesystem::path>& labels_path) {
  const auto img = read_idx(images_path, 3);
  const auto n = static_cast<std::int64_t>(img.dims[0]);
  Dataset ds;
  ds.height = static_cast<int>(img.dims[1]);
  ds.width = static_cast<int>(img.dims[2]);
  ds.images = Array({n, ds.pixels()});
  auto values = ds.images.values();
  for (std::size_t i = 0; i < img.data.size(); ++i) values[i] = img.data[i] / 255.0;
  ds.factors.values.resize(n, 0);
  if (labels_path) {
    const auto lab = read_idx(*labels_path, 1);
    if (lab.dims[0] != img.dims[0]) {
      throw FormatError(labels_path->string() + ": label count " + std::to_string(lab.dims[0]) +
                        " at byte 4 does not match image count " + std::to_string(img.dims[0]));
    }
    int classes = 1;
    for (auto b : lab.data) classes = std::max(classes, int{b} + 1);
    ds.factors.names = {"label"};
    ds.factors.cardinalities = {classes};
    ds.factors.values.resize(n, 1);
    for (std::int64_t i = 0; i < n; ++i) ds.factors.values(i, 0) = lab.data[static_cast<std::size_t>(i)];
    ds.roles = {FactorRole::kLabel};
  }
  return ds;
}

void write_idx_images(const std::filesystem::path& path, const Array& images, int height, int width) {
  if (images.rank() != 2 || images.cols() != static_cast<std::int64_t>(height) * width) {
    throw ValidationError("images are not n x (" + std::to_string(height) + "*" + std::to_string(width) + ")");
  }
  IdxTensor t{{static_cast<std::uint32_t>(images.rows()), static_cast<std::uint32_t>(height),
               static_cast<std::uint32_t>(width)},
              {}};
  t.data.reserve(static_cast<std::size_t>(images.size()));
  for (double v : images.values()) t.data.push_back(to_byte(v));
  write_idx(path, t);
}

void write_idx_labels(const std::filesystem::path& path, std::span<const int> labels) {
  IdxTensor t{{static_cast<std::uint32_t>(labels.size())}, {}};
  for (int l : labels) {
    if (l < 0 || l > 255) throw ValidationError("label " + std::to_string(l) + " does not fit a byte");
    t.data.push_back(static_cast<std::uint8_t>(l));
  }
  write_idx(path, t);
}

void save_dataset_dir(const std::filesystem::path& dir, const Dataset& dataset) {
  dataset.validate();
  std::filesystem::create_directories(dir);
  write_idx_images(dir / "images.idx", dataset.images, dataset.height, dataset.width);
  const auto k = dataset.factors.num_factors();
  IdxTensor f{{static_cast<std::uint32_t>(dataset.size()), static_cast<std::uint32_t>(k)}, {}};
  for (Eigen::Index i = 0; i < dataset.factors.values.size(); ++i) {
    const int v = dataset.factors.values.data()[i];
    if (v > 255) throw ValidationError("factor value " + std::to_string(v) + " does not fit a byte");
    f.data.push_back(static_cast<std::uint8_t>(v));
  }
  write_idx(dir / "factors.idx", f);
  json meta;
  meta["height"] = dataset.height;
  meta["width"] = dataset.width;
  meta["factors"] = json::array();
  for (std::size_t j = 0; j < k; ++j) {
    meta["factors"].push_back({{"name", dataset.factors.names[j]},
                               {"cardinality", dataset.factors.cardinalities[j]},
                               {"role", role_name(dataset.roles[j])}});
  }
  std::ofstream out(dir / "factors.json");
  out << meta.dump(2) << "\n";
  if (!out) throw FormatError((dir / "factors.json").string() + ": write failed");
}

Dataset load_dataset_dir(const std::filesystem::path& dir) {
  const auto meta_path = dir / "factors.json";
  std::ifstream in(meta_path);
  if (!in) throw FormatError(meta_path.string() + ": cannot open");
  json meta;
  try {
    meta = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(meta_path.string() + ": " + e.what());
  }
  Dataset ds = load_idx(dir / "images.idx");
  if (meta.value("height", 0) != ds.height || meta.value("width", 0) != ds.width) {
    throw FormatError(meta_path.string() + ": image size disagrees with images.idx");
  }
  const auto f = read_idx(dir / "factors.idx", 2);
  const auto& list = meta.at("factors");
  if (f.dims[0] != static_cast<std::uint32_t>(ds.size()) || f.dims[1] != list.size()) {
    throw FormatError((dir / "factors.idx").string() + ": shape at byte 4 does not match images and metadata");
  }
  ds.factors.names.clear();
  ds.factors.cardinalities.clear();
  for (const auto& item : list) {
    ds.factors.names.push_back(item.at("name").get<std::string>());
    ds.factors.cardinalities.push_back(item.at("cardinality").get<int>());
    ds.roles.push_back(parse_role(item.value("role", std::string("label"))));
  }
  ds.factors.values.resize(ds.size(), static_cast<Eigen::Index>(list.size()));
  for (std::size_t i = 0; i < f.data.size(); ++i) ds.factors.values.data()[i] = f.data[i];
  ds.validate();
  return ds;
}

}  // namespace bhivae::data
