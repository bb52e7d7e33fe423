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

#include "bhivae/runner/traversal.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "bhivae/errors.hpp"
#include "bhivae/model/bhivae.hpp"

namespace bhivae::runner {

using ndgrad::Array;

std::string traversal_pgm(const LoadedModel& model, const data::Dataset& dataset, std::int64_t sample_index,
                          int steps) {
  if (steps < 2) throw ValidationError("traversal needs at least 2 steps, got " + std::to_string(steps));
  if (sample_index < 0 || sample_index >= dataset.size()) {
    throw ValidationError("sample index " + std::to_string(sample_index) + " is outside [0, " +
                          std::to_string(dataset.size()) + ")");
  }
  if (dataset.pixels() != model.arch.data_dim) throw ValidationError("dataset images do not match the model input");
  const auto& layout = model.arch.layout;
  const Array x = Array::from_matrix(dataset.images.matrix().row(sample_index));
  const Array z = model::assemble(model::encode(model.params, model.arch, x, model::EncodeMode::kDeterministic));

  const auto units = layout.traversal_units();
  const int h = dataset.height;
  const int w = dataset.width;
  const std::int64_t width = static_cast<std::int64_t>(w) * steps;
  const std::int64_t height = static_cast<std::int64_t>(h) * static_cast<std::int64_t>(units);
  std::string pixels(static_cast<std::size_t>(width * height), '\0');
  for (std::size_t u = 0; u < units; ++u) {
    Eigen::MatrixXd codes(steps, layout.latent_dim());
    for (int k = 0; k < steps; ++k) {
      const double t = -3.0 + 6.0 * static_cast<double>(k) / static_cast<double>(steps - 1);
      codes.row(k) = model::traverse_block(z, layout, u, t).matrix();
    }
    const Array images = model::decode(model.params, model.arch, Array::from_matrix(codes));
    for (int k = 0; k < steps; ++k) {
      for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
          const double v = std::clamp(images.matrix()(k, static_cast<Eigen::Index>(r) * w + c), 0.0, 1.0);
          const auto row = static_cast<std::int64_t>(u) * h + r;
          const auto col = static_cast<std::int64_t>(k) * w + c;
          pixels[static_cast<std::size_t>(row * width + col)] = static_cast<char>(std::lround(255.0 * v));
        }
      }
    }
  }
  return "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n" + pixels;
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError(path.string() + ": write failed");
}

}  // namespace bhivae::runner
