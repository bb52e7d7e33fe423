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

#include "bhivae/runner/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "bhivae/errors.hpp"

namespace bhivae::runner {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Reads the keys of one JSON object and rejects whatever was not read.
class ObjectReader {
 public:
  ObjectReader(const json& object, std::string path) : object_(object), path_(std::move(path)) {
    if (!object_.is_object()) throw ConfigError("'" + label() + "' must be a JSON object");
  }

  bool has(const std::string& key) const { return object_.contains(key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    if (!object_.contains(key)) throw ConfigError("missing required key '" + name(key) + "'");
    return object_.at(key);
  }

  template <typename T>
  T required(const std::string& key) {
    return convert<T>(raw(key), key);
  }

  template <typename T>
  T optional(const std::string& key, T fallback) {
    seen_.insert(key);
    if (!object_.contains(key)) return fallback;
    return convert<T>(object_.at(key), key);
  }

  void finish() const {
    for (const auto& item : object_.items()) {
      if (!seen_.contains(item.key())) throw ConfigError("unknown key '" + name(item.key()) + "'");
    }
  }

  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  std::string label() const { return path_.empty() ? "config" : path_; }

  template <typename T>
  T convert(const json& value, const std::string& key) const {
    const auto fail = [&](const char* expected) {
      return ConfigError("key '" + name(key) + "' must be " + expected + ", got " + value.type_name());
    };
    if constexpr (std::is_same_v<T, bool>) {
      if (!value.is_boolean()) throw fail("a boolean");
      return value.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!value.is_string()) throw fail("a string");
      return value.get<std::string>();
    } else if constexpr (std::is_same_v<T, double>) {
      if (!value.is_number()) throw fail("a number");
      const double v = value.get<double>();
      if (!std::isfinite(v)) throw ConfigError("key '" + name(key) + "' must be finite");
      return v;
    } else if constexpr (std::is_integral_v<T>) {
      if (!value.is_number_integer()) throw fail("an integer");
      if (std::is_unsigned_v<T> && value.is_number_integer() && !value.is_number_unsigned() &&
          value.get<std::int64_t>() < 0) {
        throw ConfigError("key '" + name(key) + "' must be non-negative");
      }
      return value.get<T>();
    } else if constexpr (std::is_same_v<T, std::vector<std::int64_t>>) {
      if (!value.is_array()) throw fail("an array of integers");
      T out;
      for (const auto& v : value) {
        if (!v.is_number_integer()) throw fail("an array of integers");
        out.push_back(v.get<std::int64_t>());
      }
      return out;
    } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
      if (!value.is_array()) throw fail("an array of strings");
      T out;
      for (const auto& v : value) {
        if (!v.is_string()) throw fail("an array of strings");
        out.push_back(v.get<std::string>());
      }
      return out;
    }
  }

  const json& object_;
  std::string path_;
  std::set<std::string> seen_;
};

model::Mode parse_mode(const std::string& s) {
  if (s == "supervised") return model::Mode::kSupervised;
  if (s == "unsupervised") return model::Mode::kUnsupervised;
  throw ConfigError("key 'mode' must be \"supervised\" or \"unsupervised\", got \"" + s + "\"");
}

std::string mode_name(model::Mode m) { return m == model::Mode::kSupervised ? "supervised" : "unsupervised"; }

DatasetKind parse_kind(const std::string& s) {
  if (s == "minidsprites") return DatasetKind::kMiniDsprites;
  if (s == "mnist") return DatasetKind::kMnist;
  if (s == "directory") return DatasetKind::kDirectory;
  throw ConfigError("key 'dataset.kind' must be one of minidsprites, mnist, directory; got \"" + s + "\"");
}

HoldoutSplit parse_split(const std::string& s) {
  if (s == "samples") return HoldoutSplit::kSamples;
  if (s == "combos") return HoldoutSplit::kCombos;
  throw ConfigError("key 'dataset.split' must be \"samples\" or \"combos\", got \"" + s + "\"");
}

std::string split_name(HoldoutSplit s) { return s == HoldoutSplit::kSamples ? "samples" : "combos"; }

std::string kind_name(DatasetKind k) {
  switch (k) {
    case DatasetKind::kMiniDsprites: return "minidsprites";
    case DatasetKind::kMnist: return "mnist";
    case DatasetKind::kDirectory: return "directory";
  }
  return "minidsprites";
}

model::BlockLayout parse_layout(const json& j) {
  ObjectReader r(j, "layout");
  auto s_dims = r.required<std::vector<std::int64_t>>("s_dims");
  const auto c_dim = r.required<std::int64_t>("c_dim");
  model::BlockLayout layout;
  if (r.has("h_dims")) {
    layout = {s_dims, r.required<std::vector<std::int64_t>>("h_dims"), c_dim};
  } else {
    r.optional<std::vector<std::int64_t>>("h_dims", {});
    layout = model::BlockLayout::with_default_carriers(std::move(s_dims), c_dim);
  }
  r.finish();
  try {
    layout.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("key 'layout': ") + e.what());
  }
  return layout;
}

DatasetConfig parse_dataset(const json& j) {
  ObjectReader r(j, "dataset");
  DatasetConfig d;
  d.kind = parse_kind(r.optional<std::string>("kind", "minidsprites"));
  d.resolution = r.optional<int>("resolution", d.resolution);
  d.max_extent = r.optional<double>("max_extent", d.max_extent);
  d.seed = r.optional<std::uint64_t>("seed", d.seed);
  d.images = r.optional<std::string>("images", "");
  d.labels = r.optional<std::string>("labels", "");
  d.path = r.optional<std::string>("path", "");
  d.min_samples = r.optional<std::int64_t>("min_samples", d.min_samples);
  d.heldout_fraction = r.optional<double>("heldout_fraction", d.heldout_fraction);
  d.split = parse_split(r.optional<std::string>("split", "samples"));
  if (r.has("factors")) {
    const auto& list = r.raw("factors");
    if (!list.is_array()) throw ConfigError("key 'dataset.factors' must be an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      ObjectReader f(list[i], "dataset.factors[" + std::to_string(i) + "]");
      data::FactorSpec spec;
      spec.name = f.required<std::string>("name");
      spec.cardinality = f.required<int>("cardinality");
      const auto role = f.optional<std::string>("role", spec.name);
      try {
        spec.role = data::parse_role(role);
      } catch (const ValidationError&) {
        throw ConfigError("key '" + f.name("role") + "' has unknown role \"" + role + "\"");
      }
      f.finish();
      d.factors.push_back(spec);
    }
  }
  r.finish();
  return d;
}

ArchitectureConfig parse_architecture(const json& j) {
  ObjectReader r(j, "architecture");
  ArchitectureConfig a;
  auto list = [&](const char* key, std::optional<std::vector<std::int64_t>>& out) {
    if (r.has(key)) out = r.required<std::vector<std::int64_t>>(key);
  };
  list("encoder_hidden", a.encoder_hidden);
  list("part_hidden", a.part_hidden);
  list("merge_hidden", a.merge_hidden);
  list("classifier_hidden", a.classifier_hidden);
  list("discriminator_hidden", a.discriminator_hidden);
  if (r.has("merge_width")) a.merge_width = r.required<std::int64_t>("merge_width");
  r.finish();
  return a;
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError("key '" + key + "' " + what);
}

}  // namespace

void RunConfig::validate() const {
  try {
    layout.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("key 'layout': ") + e.what());
  }
  require(std::isfinite(weights.beta) && weights.beta >= 0.0, "beta", "must be finite and non-negative");
  require(std::isfinite(weights.gamma) && weights.gamma >= 0.0, "gamma", "must be finite and non-negative");
  require(std::isfinite(rho) && std::abs(rho) < 1.0, "rho", "must satisfy |rho| < 1");
  require(optimizer.step_size > 0.0, "optimizer.step_size", "must be positive");
  require(optimizer.beta1 >= 0.0 && optimizer.beta1 < 1.0, "optimizer.beta1", "must lie in [0, 1)");
  require(optimizer.beta2 >= 0.0 && optimizer.beta2 < 1.0, "optimizer.beta2", "must lie in [0, 1)");
  require(optimizer.epsilon > 0.0, "optimizer.epsilon", "must be positive");
  require(optimizer.adversary_step_size > 0.0, "optimizer.adversary_step_size", "must be positive");
  require(optimizer.projection_steps >= 1, "optimizer.projection_steps", "must be at least 1");
  require(batch_size >= 2, "batch_size", "must be at least 2");
  require(total_steps >= 0, "total_steps", "must be non-negative");
  require(dataset.heldout_fraction >= 0.0 && dataset.heldout_fraction < 1.0, "dataset.heldout_fraction",
          "must lie in [0, 1)");
  require(dataset.min_samples >= 1, "dataset.min_samples", "must be positive");
  require(metrics.bins >= 2, "metrics.bins", "must be at least 2");
  require(metrics.votes >= 2, "metrics.votes", "must be at least 2");
  require(metrics.pairs_per_vote >= 1, "metrics.pairs_per_vote", "must be positive");
  if (mode == model::Mode::kSupervised) {
    require(layer_factors.size() == layout.num_layers(), "layer_factors",
            "must name one factor per layer (" + std::to_string(layout.num_layers()) + ")");
  }
  switch (dataset.kind) {
    case DatasetKind::kMiniDsprites:
      require(dataset.resolution == 32 || dataset.resolution == 64, "dataset.resolution", "must be 32 or 64");
      require(dataset.max_extent > 0.0, "dataset.max_extent", "must be positive");
      break;
    case DatasetKind::kMnist:
      require(!dataset.images.empty(), "dataset.images", "is required for mnist");
      break;
    case DatasetKind::kDirectory:
      require(!dataset.path.empty(), "dataset.path", "is required for directory datasets");
      break;
  }
}

RunConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ObjectReader r(j, "");
  RunConfig c;
  c.mode = parse_mode(r.required<std::string>("mode"));
  c.layout = parse_layout(r.raw("layout"));
  c.weights.beta = r.optional<double>("beta", c.weights.beta);
  c.weights.gamma = r.optional<double>("gamma", c.weights.gamma);
  c.rho = r.optional<double>("rho", c.rho);
  if (r.has("optimizer")) {
    ObjectReader o(r.raw("optimizer"), "optimizer");
    c.optimizer.step_size = o.optional<double>("step_size", c.optimizer.step_size);
    c.optimizer.beta1 = o.optional<double>("beta1", c.optimizer.beta1);
    c.optimizer.beta2 = o.optional<double>("beta2", c.optimizer.beta2);
    c.optimizer.epsilon = o.optional<double>("epsilon", c.optimizer.epsilon);
    c.optimizer.adversary_step_size = o.optional<double>("adversary_step_size", c.optimizer.adversary_step_size);
    c.optimizer.projection_steps = o.optional<int>("projection_steps", c.optimizer.projection_steps);
    o.finish();
  }
  c.batch_size = r.optional<std::int64_t>("batch_size", c.batch_size);
  c.total_steps = r.optional<std::int64_t>("total_steps", c.total_steps);
  c.seed = r.optional<std::uint64_t>("seed", c.seed);
  if (r.has("dataset")) c.dataset = parse_dataset(r.raw("dataset"));
  c.layer_factors = r.optional<std::vector<std::string>>("layer_factors", c.layer_factors);
  if (r.has("metrics")) {
    ObjectReader m(r.raw("metrics"), "metrics");
    c.metrics.bins = m.optional<int>("bins", c.metrics.bins);
    c.metrics.votes = m.optional<int>("votes", c.metrics.votes);
    c.metrics.pairs_per_vote = m.optional<int>("pairs_per_vote", c.metrics.pairs_per_vote);
    m.finish();
  }
  if (r.has("architecture")) c.architecture = parse_architecture(r.raw("architecture"));
  c.out_dir = r.optional<std::string>("out_dir", c.out_dir);
  r.finish();
  c.validate();
  return c;
}

DatasetConfig parse_dataset_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("dataset spec is not valid JSON: ") + e.what());
  }
  RunConfig holder;
  holder.layout = model::BlockLayout::with_default_carriers({1}, 1);
  holder.dataset = parse_dataset(j);
  holder.validate();
  return holder.dataset;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str());
}

std::string config_to_json(const RunConfig& c) {
  ordered_json j;
  j["mode"] = mode_name(c.mode);
  j["layout"] = {{"s_dims", c.layout.s_dims}, {"h_dims", c.layout.h_dims}, {"c_dim", c.layout.c_dim}};
  j["beta"] = c.weights.beta;
  j["gamma"] = c.weights.gamma;
  j["rho"] = c.rho;
  j["optimizer"] = {{"step_size", c.optimizer.step_size},
                    {"beta1", c.optimizer.beta1},
                    {"beta2", c.optimizer.beta2},
                    {"epsilon", c.optimizer.epsilon},
                    {"adversary_step_size", c.optimizer.adversary_step_size},
                    {"projection_steps", c.optimizer.projection_steps}};
  j["batch_size"] = c.batch_size;
  j["total_steps"] = c.total_steps;
  j["seed"] = c.seed;
  ordered_json d;
  d["kind"] = kind_name(c.dataset.kind);
  d["resolution"] = c.dataset.resolution;
  d["max_extent"] = c.dataset.max_extent;
  d["seed"] = c.dataset.seed;
  d["images"] = c.dataset.images;
  d["labels"] = c.dataset.labels;
  d["path"] = c.dataset.path;
  d["min_samples"] = c.dataset.min_samples;
  d["heldout_fraction"] = c.dataset.heldout_fraction;
  d["split"] = split_name(c.dataset.split);
  d["factors"] = ordered_json::array();
  for (const auto& f : c.dataset.factors) {
    d["factors"].push_back({{"name", f.name}, {"cardinality", f.cardinality}, {"role", data::role_name(f.role)}});
  }
  j["dataset"] = d;
  j["layer_factors"] = c.layer_factors;
  j["metrics"] = {{"bins", c.metrics.bins}, {"votes", c.metrics.votes}, {"pairs_per_vote", c.metrics.pairs_per_vote}};
  ordered_json a = ordered_json::object();
  const auto& ac = c.architecture;
  if (ac.encoder_hidden) a["encoder_hidden"] = *ac.encoder_hidden;
  if (ac.part_hidden) a["part_hidden"] = *ac.part_hidden;
  if (ac.merge_width) a["merge_width"] = *ac.merge_width;
  if (ac.merge_hidden) a["merge_hidden"] = *ac.merge_hidden;
  if (ac.classifier_hidden) a["classifier_hidden"] = *ac.classifier_hidden;
  if (ac.discriminator_hidden) a["discriminator_hidden"] = *ac.discriminator_hidden;
  j["architecture"] = a;
  j["out_dir"] = c.out_dir;
  return j.dump(2);
}

model::Architecture make_architecture(const RunConfig& config, std::int64_t data_dim,
                                      std::vector<std::int64_t> classes) {
  model::Architecture a;
  a.layout = config.layout;
  a.mode = config.mode;
  a.data_dim = data_dim;
  const auto& o = config.architecture;
  if (o.encoder_hidden) a.encoder_hidden = *o.encoder_hidden;
  if (o.part_hidden) a.part_hidden = *o.part_hidden;
  if (o.merge_width) a.merge_width = *o.merge_width;
  if (o.merge_hidden) a.merge_hidden = *o.merge_hidden;
  if (o.classifier_hidden) a.classifier_hidden = *o.classifier_hidden;
  if (o.discriminator_hidden) a.discriminator_hidden = *o.discriminator_hidden;
  if (config.mode == model::Mode::kSupervised) a.classes = std::move(classes);
  a.validate();
  return a;
}

}  // namespace bhivae::runner
