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

#include "bhivae/runner/trainer.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "bhivae/data/batch.hpp"
#include "bhivae/errors.hpp"
#include "bhivae/model/bhivae.hpp"
#include "bhivae/objectives/prior.hpp"
#include "bhivae/util/random.hpp"

namespace bhivae::runner {
namespace {

using model::Mode;
using ndgrad::Array;
using ndgrad::Bindings;
using ndgrad::Graph;
using ndgrad::NodeId;

// Seed streams derived from the run seed.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kBatchStream = 2;
constexpr std::uint64_t kNoiseStream = 3;
constexpr std::uint64_t kPriorStream = 4;
constexpr std::uint64_t kPermStream = 5;

constexpr std::int64_t kEncodeChunk = 512;

std::vector<std::string> group(const nn::ParamStore& params, std::initializer_list<const char*> prefixes) {
  std::vector<std::string> out;
  for (const auto& [name, value] : params) {
    for (const char* p : prefixes) {
      if (name.starts_with(p)) {
        out.push_back(name);
        break;
      }
    }
  }
  return out;
}

std::vector<NodeId> nodes_of(const nn::ParamNodes& nodes, const std::vector<std::string>& names) {
  std::vector<NodeId> out;
  for (const auto& n : names) out.push_back(nn::lookup(nodes, n));
  return out;
}

std::string layer_term(const char* name, std::size_t layer) { return std::string(name) + "/" + std::to_string(layer); }

// One training graph over a fixed batch size; parameters are bound by
// reference, per-step inputs by value.
class Session {
 public:
  Session(const RunConfig& config, const model::Architecture& arch, nn::ParamStore& params)
      : config_(config), arch_(arch), params_(params) {
    nodes_ = nn::declare(graph_, params_);
    nn::bind(bindings_, params_);
    const auto B = config.batch_size;
    x_ = graph_.input("x", {B, arch.data_dim});
    if (config.mode == Mode::kSupervised) {
      build_supervised();
    } else {
      build_unsupervised();
    }
  }

  TraceRow step(std::int64_t step, const data::Batch& batch, AdamState& adam) {
    const auto L = arch_.layout.num_layers();
    const auto B = config_.batch_size;
    bindings_.set("x", batch.images);
    if (config_.mode == Mode::kSupervised) {
      const auto noise_seed = util::derive_seed(config_.seed, kNoiseStream);
      for (std::size_t i = 0; i < L; ++i) {
        bindings_.set("noise" + std::to_string(i),
                      model::standard_normal(B, arch_.layout.layer_width(i),
                                             util::derive_seed(noise_seed, static_cast<std::uint64_t>(step) * L + i)));
        std::vector<int> labels(static_cast<std::size_t>(B));
        for (std::int64_t r = 0; r < B; ++r) labels[static_cast<std::size_t>(r)] = batch.factors(r, label_columns_[i]);
        bindings_.set("labels" + std::to_string(i), nn::one_hot(labels, arch_.classes[i]));
      }
    } else {
      const auto prior_seed = util::derive_seed(config_.seed, kPriorStream);
      const auto perm_seed = util::derive_seed(config_.seed, kPermStream);
      for (std::size_t i = 0; i < L; ++i) {
        const auto stream = static_cast<std::uint64_t>(step) * L + i;
        bindings_.set("prior" + std::to_string(i),
                      objectives::sample_prior(priors_[i], B, util::derive_seed(prior_seed, stream)));
        const auto ps = util::random_permutation(B, util::derive_seed(perm_seed, 2 * stream));
        const auto ph = util::random_permutation(B, util::derive_seed(perm_seed, 2 * stream + 1));
        bindings_.set("perm_s" + std::to_string(i), objectives::permutation_array(ps));
        bindings_.set("perm_h" + std::to_string(i), objectives::permutation_array(ph));
      }
    }

    auto forward = [&] {
      try {
        return ndgrad::evaluate(graph_, bindings_);
      } catch (const NumericalError& e) {
        throw NumericalError("step " + std::to_string(step) + ": " + e.what());
      }
    };
    auto adversary = config_.optimizer;
    adversary.step_size = adversary.adversary_step_size;
    ++adam.step;
    std::optional<ndgrad::Evaluation> ev;
    if (config_.mode == Mode::kUnsupervised) {
      // Discriminators move first; the generator then answers the updated ones.
      const auto disc_ev = forward();
      const auto side_grads = ndgrad::gradients(disc_ev, side_total_, side_nodes_);
      adam_update(params_, adam, nodes_, side_grads, adversary, side_group_);
    }
    ev.emplace(forward());
    TraceRow row;
    row.step = step;
    for (const auto& [name, node] : terms_) row.terms.emplace_back(name, ev->scalar(node));
    row.total = ev->scalar(total_);
    if (!std::isfinite(row.total)) {
      std::string breakdown;
      for (const auto& [name, v] : row.terms) breakdown += " " + name + "=" + std::to_string(v);
      throw NumericalError("step " + std::to_string(step) + ": non-finite loss;" + breakdown);
    }
    const auto main_grads = ndgrad::gradients(*ev, total_, main_nodes_);
    if (config_.mode == Mode::kSupervised) {
      const auto side_grads = ndgrad::gradients(*ev, side_total_, side_nodes_);
      adam_update(params_, adam, nodes_, side_grads, adversary, side_group_);
    }
    adam_update(params_, adam, nodes_, main_grads, config_.optimizer, main_group_);
    // Further projection updates on the same carriers, so the encoder is
    // graded against a near-best response rather than a lagging one.
    if (config_.mode == Mode::kSupervised && adv_extra_ > 0) {
      for (std::size_t i = 0; i < L; ++i) {
        adv_bindings_.set("h" + std::to_string(i), ev->value(carriers_[i]));
        adv_bindings_.set("labels" + std::to_string(i), *bindings_.find("labels" + std::to_string(i)));
      }
      for (int k = 0; k < adv_extra_; ++k) {
        const auto aev = ndgrad::evaluate(adv_graph_, adv_bindings_);
        const auto g = ndgrad::gradients(aev, adv_total_, adv_side_nodes_);
        adam_update(params_, adam, adv_nodes_, g, adversary, side_group_);
      }
    }
    return row;
  }

  void set_label_columns(std::vector<Eigen::Index> cols) { label_columns_ = std::move(cols); }

 private:
  void build_supervised() {
    const auto L = arch_.layout.num_layers();
    const auto B = config_.batch_size;
    const auto& w = config_.weights;
    std::vector<NodeId> noise;
    for (std::size_t i = 0; i < L; ++i) {
      noise.push_back(graph_.input("noise" + std::to_string(i), {B, arch_.layout.layer_width(i)}));
    }
    const auto enc = model::build_encoder(graph_, nodes_, arch_, x_, noise);
    // The decoder reads the s blocks at their detached means: reconstruction
    // then shapes the carriers and the decoder but never bends s^i away from
    // its factor.
    auto detached = enc;
    for (auto& layer : detached.layers) layer.s = graph_.stop_gradient(layer.s_mean);
    const NodeId zin = model::build_assemble(graph_, detached);
    const NodeId x_hat = model::build_decoder(graph_, nodes_, arch_, zin);
    const NodeId recon = objectives::reconstruction_loss(graph_, x_, x_hat);
    terms_.emplace_back("recon", recon);
    std::vector<NodeId> bounds, erasures, probes;
    for (std::size_t i = 0; i < L; ++i) {
      const auto& layer = enc.layers[i];
      const NodeId labels = graph_.input("labels" + std::to_string(i), {B, arch_.classes[i]});
      // KL over all of z^i: without it the carriers grow without bound and
      // their variance collapses, which stalls the erasure game.
      const NodeId kl = objectives::kl_diag_gaussian_to_standard(graph_, layer.mean, *layer.log_var);
      const NodeId carrier_x = layer.carrier_mean;
      const NodeId logits = model::build_classifier(graph_, nodes_, arch_, i, layer.s, false);
      const NodeId ce = nn::softmax_cross_entropy(graph_, logits, labels);
      bounds.push_back(graph_.add(kl, graph_.scale(ce, w.beta)));
      const auto cls_spec = arch_.classifier(i);
      const auto proj_spec = arch_.projection(i);
      // Erasure and adversary act on the carrier mean: an unregularized
      // carrier variance could otherwise mask the factor with noise.
      const NodeId erase = objectives::max_entropy_erasure(
          graph_, carrier_x, nn::mlp_nodes(nodes_, model::names::classifier(i), cls_spec), cls_spec,
          nn::mlp_nodes(nodes_, model::names::projection(i), proj_spec), proj_spec);
      erasures.push_back(erase);
      // The adversary: the projection learns to read the factor from a
      // detached carrier through the frozen classifier.
      const NodeId probe_in =
          model::build_projection(graph_, nodes_, arch_, i, graph_.stop_gradient(carrier_x), false);
      const NodeId probe_logits = model::build_classifier(graph_, nodes_, arch_, i, probe_in, true);
      probes.push_back(nn::softmax_cross_entropy(graph_, probe_logits, labels));
      carriers_.push_back(carrier_x);
      terms_.emplace_back(layer_term("kl", i), kl);
      terms_.emplace_back(layer_term("ce", i), ce);
      terms_.emplace_back(layer_term("erase", i), erase);
      terms_.emplace_back(layer_term("probe", i), probes.back());
    }
    total_ = objectives::total_supervised_loss(graph_, bounds, erasures, recon, w);
    side_total_ = probes.front();
    for (std::size_t i = 1; i < L; ++i) side_total_ = graph_.add(side_total_, probes[i]);
    adv_extra_ = config_.optimizer.projection_steps - 1;
    adv_nodes_ = nn::declare(adv_graph_, params_);
    nn::bind(adv_bindings_, params_);
    std::vector<NodeId> adv_probes;
    for (std::size_t i = 0; i < L; ++i) {
      const NodeId h = adv_graph_.input("h" + std::to_string(i), {B, arch_.layout.carrier_width(i)});
      const NodeId labels = adv_graph_.input("labels" + std::to_string(i), {B, arch_.classes[i]});
      const NodeId pin = model::build_projection(adv_graph_, adv_nodes_, arch_, i, h, false);
      adv_probes.push_back(nn::softmax_cross_entropy(
          adv_graph_, model::build_classifier(adv_graph_, adv_nodes_, arch_, i, pin, true), labels));
    }
    adv_total_ = adv_probes.front();
    for (std::size_t i = 1; i < L; ++i) adv_total_ = adv_graph_.add(adv_total_, adv_probes[i]);
    main_group_ = group(params_, {"enc", "dec", "cls"});
    side_group_ = group(params_, {"proj"});
    main_nodes_ = nodes_of(nodes_, main_group_);
    side_nodes_ = nodes_of(nodes_, side_group_);
    adv_side_nodes_ = nodes_of(adv_nodes_, side_group_);
  }

  void build_unsupervised() {
    const auto L = arch_.layout.num_layers();
    const auto B = config_.batch_size;
    const auto enc = model::build_encoder(graph_, nodes_, arch_, x_);
    const NodeId x_hat = model::build_decoder(graph_, nodes_, arch_, model::build_assemble(graph_, enc));
    const NodeId recon = objectives::reconstruction_loss(graph_, x_, x_hat);
    terms_.emplace_back("recon", recon);
    std::vector<NodeId> gen_kl, tc, disc;
    for (std::size_t i = 0; i < L; ++i) {
      const auto& layer = enc.layers[i];
      const auto width = arch_.layout.layer_width(i);
      priors_.push_back(objectives::BlockPrior::for_layer(arch_.layout, i, config_.rho));
      const NodeId prior = graph_.input("prior" + std::to_string(i), {B, width});
      const NodeId ps = graph_.input("perm_s" + std::to_string(i), {B});
      const NodeId ph = graph_.input("perm_h" + std::to_string(i), {B});
      const NodeId permuted = graph_.concat({graph_.gather_rows(graph_.stop_gradient(layer.s), ps),
                                             graph_.gather_rows(graph_.stop_gradient(layer.carrier), ph)});
      const auto dl = objectives::discriminator_losses(
          graph_, model::build_discriminator(graph_, nodes_, arch_, i, layer.z),
          model::build_discriminator(graph_, nodes_, arch_, i, prior),
          model::build_discriminator(graph_, nodes_, arch_, i, permuted));
      gen_kl.push_back(dl.gen_kl);
      tc.push_back(dl.tc);
      disc.push_back(dl.disc_loss);
      terms_.emplace_back(layer_term("gen_kl", i), dl.gen_kl);
      terms_.emplace_back(layer_term("tc", i), dl.tc);
      terms_.emplace_back(layer_term("disc", i), dl.disc_loss);
    }
    total_ = objectives::total_unsupervised_loss(graph_, gen_kl, tc, recon, config_.weights);
    side_total_ = disc.front();
    for (std::size_t i = 1; i < L; ++i) side_total_ = graph_.add(side_total_, disc[i]);
    main_group_ = group(params_, {"enc", "dec"});
    side_group_ = group(params_, {"disc"});
    main_nodes_ = nodes_of(nodes_, main_group_);
    side_nodes_ = nodes_of(nodes_, side_group_);
  }

  const RunConfig& config_;
  const model::Architecture& arch_;
  nn::ParamStore& params_;
  Graph graph_;
  Bindings bindings_;
  nn::ParamNodes nodes_;
  NodeId x_;
  NodeId total_;
  NodeId side_total_;
  std::vector<std::pair<std::string, NodeId>> terms_;
  std::vector<std::string> main_group_, side_group_;
  std::vector<NodeId> main_nodes_, side_nodes_;
  std::vector<objectives::BlockPrior> priors_;
  std::vector<Eigen::Index> label_columns_;
  std::vector<NodeId> carriers_;
  Graph adv_graph_;
  Bindings adv_bindings_;
  nn::ParamNodes adv_nodes_;
  NodeId adv_total_;
  std::vector<NodeId> adv_side_nodes_;
  int adv_extra_ = 0;
};

std::int64_t rows_of(const nn::ParamStore& p, const std::string& name) { return p.at(name).shape().at(0); }
std::int64_t last_of(const nn::ParamStore& p, const std::string& name) { return p.at(name).shape().back(); }

}  // namespace

double TraceRow::term(const std::string& name) const {
  for (const auto& [n, v] : terms) {
    if (n == name) return v;
  }
  throw ValidationError("trace row has no term '" + name + "'");
}

std::string trace_line(const TraceRow& row) {
  nlohmann::ordered_json j;
  j["step"] = row.step;
  for (const auto& [name, v] : row.terms) j[name] = v;
  j["total"] = row.total;
  return j.dump();
}

TrainResult train(const RunConfig& config, const TrainingData& data, const StepHook& hook) {
  config.validate();
  const auto& train_set = data.train;
  std::vector<std::int64_t> classes;
  std::vector<Eigen::Index> label_columns;
  if (config.mode == Mode::kSupervised) {
    classes = layer_classes(train_set, config);
    for (const auto& name : config.layer_factors) {
      label_columns.push_back(static_cast<Eigen::Index>(*train_set.factor_index(name)));
    }
  }
  const auto arch = make_architecture(config, train_set.pixels(), classes);
  auto params = model::init_params(arch, util::derive_seed(config.seed, kInitStream));
  auto adam = init_adam(params);

  TrainResult result;
  {
    Session session(config, arch, params);
    session.set_label_columns(label_columns);
    data::BatchIterator batches(train_set, config.batch_size, util::derive_seed(config.seed, kBatchStream));
    for (std::int64_t step = 0; step < config.total_steps; ++step) {
      const auto batch = batches.next();
      result.trace.push_back(session.step(step, batch, adam));
      if (hook) hook(result.trace.back());
    }
  }
  result.checkpoint.config_json = config_to_json(config);
  result.checkpoint.step = static_cast<std::uint64_t>(config.total_steps);
  result.checkpoint.params = round_to_float(params);
  result.checkpoint.adam = {round_to_float(adam.m), round_to_float(adam.v), adam.step};
  return result;
}

TrainResult train(const RunConfig& config, const StepHook& hook) {
  return train(config, load_training_data(config), hook);
}

void write_run(const TrainResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_checkpoint(result.checkpoint, dir / "checkpoint.bin");
  std::ofstream out(dir / "trace.jsonl");
  for (const auto& row : result.trace) out << trace_line(row) << "\n";
  if (!out) throw FormatError((dir / "trace.jsonl").string() + ": write failed");
}

LoadedModel load_model(const Checkpoint& checkpoint) {
  LoadedModel m{checkpoint.config(), {}, checkpoint.params};
  const auto& p = m.params;
  const auto trunk0 = model::names::trunk(0) + ".0.w";
  if (!p.contains(trunk0)) throw ValidationError("checkpoint has no encoder parameters");
  std::vector<std::int64_t> classes;
  if (m.config.mode == Mode::kSupervised) {
    for (std::size_t i = 0; i < m.config.layout.num_layers(); ++i) {
      const auto prefix = model::names::classifier(i) + ".";
      const auto names = p.names(prefix);
      if (names.empty()) throw ValidationError("checkpoint lacks classifier " + std::to_string(i));
      classes.push_back(last_of(p, names.back()));
    }
  }
  m.arch = make_architecture(m.config, rows_of(p, trunk0), classes);
  const auto expected = model::init_params(m.arch, 0);
  for (const auto& [name, value] : expected) {
    if (!p.contains(name) || p.at(name).shape() != value.shape()) {
      throw ValidationError("checkpoint parameter '" + name + "' is missing or has the wrong shape");
    }
  }
  return m;
}

Eigen::MatrixXd encode_means(const LoadedModel& model, const ndgrad::Array& images) {
  if (images.rank() != 2 || images.cols() != model.arch.data_dim) {
    throw ValidationError("images of shape " + ndgrad::to_string(images.shape()) + " do not match the model input " +
                          std::to_string(model.arch.data_dim));
  }
  Eigen::MatrixXd out(images.rows(), model.arch.layout.latent_dim());
  for (std::int64_t begin = 0; begin < images.rows(); begin += kEncodeChunk) {
    const auto n = std::min(kEncodeChunk, images.rows() - begin);
    const auto chunk = Array::from_matrix(images.matrix().middleRows(begin, n));
    const auto code = model::encode(model.params, model.arch, chunk, model::EncodeMode::kDeterministic);
    out.middleRows(begin, n) = model::assemble(code).matrix();
  }
  return out;
}

}  // namespace bhivae::runner
