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

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "bhivae/data/idx.hpp"
#include "bhivae/errors.hpp"
#include "bhivae/runner/ablation.hpp"
#include "bhivae/runner/datasets.hpp"
#include "bhivae/runner/evaluate.hpp"
#include "bhivae/runner/trainer.hpp"
#include "bhivae/runner/traversal.hpp"

namespace {

namespace fs = std::filesystem;
using namespace bhivae;

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// A dataset directory as written by gen-data, or a JSON dataset spec.
data::Dataset dataset_from(const fs::path& path) {
  if (fs::is_directory(path)) return data::load_dataset_dir(path);
  return runner::load_dataset(runner::parse_dataset_config_text(read_text(path)));
}

int run_train(const fs::path& config_path, int log_every) {
  const auto config = runner::parse_config(config_path);
  const auto result = runner::train(config, [&](const runner::TraceRow& row) {
    if (log_every > 0 && row.step % log_every == 0) std::cerr << runner::trace_line(row) << "\n";
  });
  runner::write_run(result, config.out_dir);
  std::cout << (fs::path(config.out_dir) / "checkpoint.bin").string() << "\n";
  return 0;
}

int run_eval(const fs::path& ckpt, const fs::path& dataset_path) {
  const auto model = runner::load_model(runner::load_checkpoint(ckpt));
  const auto report = runner::evaluate(model, dataset_from(dataset_path));
  std::cout << report.to_json() << "\n";
  return 0;
}

int run_traverse(const fs::path& ckpt, std::int64_t sample, int steps, const fs::path& out) {
  const auto model = runner::load_model(runner::load_checkpoint(ckpt));
  const auto data = runner::load_training_data(model.config);
  runner::write_file(out, runner::traversal_pgm(model, data.full, sample, steps));
  return 0;
}

int run_gen_data(const fs::path& spec, const fs::path& out) {
  const auto dataset = runner::load_dataset(runner::parse_dataset_config_text(read_text(spec)));
  data::save_dataset_dir(out, dataset);
  std::cout << dataset.size() << " samples written to " << out.string() << "\n";
  return 0;
}

int run_ablate(const fs::path& config_path, const std::string& factor) {
  const auto report = runner::run_ablation(runner::parse_config(config_path), factor);
  std::cout << report.to_json() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical block VAE: training, evaluation and traversal"};
  app.require_subcommand(1);

  std::string config_path, ckpt, dataset_path, spec, out, factor = "shape";
  std::int64_t sample = 0;
  int steps = 8;
  int log_every = 100;

  auto* train = app.add_subcommand("train", "Train from a JSON config; writes checkpoint.bin and trace.jsonl");
  train->add_option("config", config_path)->required()->check(CLI::ExistingFile);
  train->add_option("--log-every", log_every, "Print every n-th trace row to stderr (0 disables)");

  auto* eval = app.add_subcommand("eval", "Score a checkpoint on a dataset; prints a JSON report");
  eval->add_option("ckpt", ckpt)->required()->check(CLI::ExistingFile);
  eval->add_option("dataset", dataset_path, "Dataset directory or JSON dataset spec")->required()->check(
      CLI::ExistingPath);

  auto* traverse = app.add_subcommand("traverse", "Write a PGM grid of block traversals");
  traverse->add_option("ckpt", ckpt)->required()->check(CLI::ExistingFile);
  traverse->add_option("--sample", sample, "Row of the checkpoint's dataset")->required();
  traverse->add_option("--steps", steps, "Tiles per row, t from -3 to 3")->required();
  traverse->add_option("--out", out, "Output .pgm path")->required();

  auto* gen = app.add_subcommand("gen-data", "Generate a dataset from a JSON dataset spec");
  gen->add_option("spec", spec)->required()->check(CLI::ExistingFile);
  gen->add_option("--out", out, "Output directory")->required();

  auto* ablate = app.add_subcommand("ablate", "Compare 2-wide and 1-wide s blocks for one factor");
  ablate->add_option("config", config_path)->required()->check(CLI::ExistingFile);
  ablate->add_option("--factor", factor, "Factor learned by the single layer");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*train) return run_train(config_path, log_every);
    if (*eval) return run_eval(ckpt, dataset_path);
    if (*traverse) return run_traverse(ckpt, sample, steps, out);
    if (*gen) return run_gen_data(spec, out);
    if (*ablate) return run_ablate(config_path, factor);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
