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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bhivae/data/dataset.hpp"

namespace bhivae::data {

inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;
inline constexpr std::uint32_t kIdxMatrixMagic = 0x00000802;
inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;

/// An unsigned-byte IDX tensor.
struct IdxTensor {
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> data;
};

/// Reads an unsigned-byte IDX file with `expected_dims` dimensions. Bad magic,
/// truncation and trailing bytes throw FormatError with the byte offset.
IdxTensor read_idx(const std::filesystem::path& path, std::size_t expected_dims);
void write_idx(const std::filesystem::path& path, const IdxTensor& tensor);

/// Images (n, rows, cols) scaled by 1/255, with an optional label file
/// exposed as factor "label".
Dataset load_idx(const std::filesystem::path& images_path,
                 const std::optional<std::filesystem::path>& labels_path = std::nullopt);

/// Pixel values are rounded from [0, 1] to bytes.
void write_idx_images(const std::filesystem::path& path, const Array& images, int height, int width);
void write_idx_labels(const std::filesystem::path& path, std::span<const int> labels);

/// Directory layout: images.idx, factors.idx (n x k bytes) and factors.json
/// naming each factor with its cardinality and role.
void save_dataset_dir(const std::filesystem::path& dir, const Dataset& dataset);
Dataset load_dataset_dir(const std::filesystem::path& dir);

}  // namespace bhivae::data
