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

#include "bhivae/runner/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "bhivae/errors.hpp"

namespace bhivae::runner {
namespace {

constexpr char kMagic[4] = {'B', 'H', 'I', 'V'};
const std::string kMomentPrefix = "adam.m/";
const std::string kVariancePrefix = "adam.v/";

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void u32(std::uint32_t v) { bytes(&v, 4); }
  void u64(std::uint64_t v) { bytes(&v, 8); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  void record(const std::string& name, const ndgrad::Array& a) {
    str(name);
    u32(static_cast<std::uint32_t>(a.rank()));
    for (auto d : a.shape()) u32(static_cast<std::uint32_t>(d));
    for (double v : a.values()) {
      const auto f = static_cast<float>(v);
      bytes(&f, 4);
    }
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  Reader(const std::vector<std::uint8_t>& in, std::string origin) : in_(in), origin_(std::move(origin)) {}

  void bytes(void* p, std::size_t n) {
    if (pos_ + n > in_.size()) {
      throw FormatError(origin_ + ": truncated at byte " + std::to_string(in_.size()) + ", needed " +
                        std::to_string(pos_ + n));
    }
    std::memcpy(p, in_.data() + pos_, n);
    pos_ += n;
  }
  std::uint32_t u32() {
    std::uint32_t v;
    bytes(&v, 4);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v;
    bytes(&v, 8);
    return v;
  }
  std::string str() {
    const auto n = u32();
    if (n > in_.size() - pos_) throw FormatError(origin_ + ": string length " + std::to_string(n) + " at byte " + std::to_string(pos_ - 4) + " overruns the file");
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }
  ndgrad::Array array() {
    const auto rank = u32();
    if (rank > 8) throw FormatError(origin_ + ": implausible rank " + std::to_string(rank) + " at byte " + std::to_string(pos_ - 4));
    ndgrad::Shape shape;
    std::uint64_t count = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
      shape.push_back(u32());
      count *= static_cast<std::uint64_t>(shape.back());
    }
    if (count * 4 > in_.size() - pos_) {
      throw FormatError(origin_ + ": record at byte " + std::to_string(pos_) + " overruns the file");
    }
    ndgrad::Array a(shape);
    for (auto& v : a.values()) {
      float f;
      bytes(&f, 4);
      v = f;
    }
    return a;
  }
  std::size_t pos() const { return pos_; }
  bool done() const { return pos_ == in_.size(); }

 private:
  const std::vector<std::uint8_t>& in_;
  std::string origin_;
  std::size_t pos_ = 0;
};

}  // namespace

AdamState init_adam(const nn::ParamStore& params) {
  AdamState s;
  for (const auto& [name, value] : params) {
    s.m.insert(name, ndgrad::Array(value.shape()));
    s.v.insert(name, ndgrad::Array(value.shape()));
  }
  return s;
}

void adam_update(nn::ParamStore& params, AdamState& state, const nn::ParamNodes& nodes,
                 const ndgrad::GradientMap& grads, const OptimizerConfig& config, const std::vector<std::string>& group) {
  if (state.step == 0) throw ContractError("advance the Adam step before updating");
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (const auto& name : group) {
    const auto it = grads.find(nn::lookup(nodes, name));
    if (it == grads.end()) continue;
    const auto& g = it->second.matrix().array();
    auto m = state.m.at(name).matrix().array();
    auto v = state.v.at(name).matrix().array();
    m = config.beta1 * m + (1.0 - config.beta1) * g;
    v = config.beta2 * v + (1.0 - config.beta2) * g.square();
    params.at(name).matrix().array() -= config.step_size * (m / c1) / ((v / c2).sqrt() + config.epsilon);
  }
}

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt) {
  Writer w;
  w.bytes(kMagic, 4);
  w.u32(kCheckpointVersion);
  w.str(ckpt.config_json);
  w.u64(ckpt.step);
  w.u32(static_cast<std::uint32_t>(ckpt.params.size() + ckpt.adam.m.size() + ckpt.adam.v.size()));
  for (const auto& [name, value] : ckpt.params) w.record(name, value);
  for (const auto& [name, value] : ckpt.adam.m) w.record(kMomentPrefix + name, value);
  for (const auto& [name, value] : ckpt.adam.v) w.record(kVariancePrefix + name, value);
  return w.take();
}

Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes, const std::string& origin) {
  Reader r(bytes, origin);
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError(origin + ": bad magic at byte 0, not a checkpoint");
  const auto version = r.u32();
  if (version != kCheckpointVersion) {
    throw FormatError(origin + ": unsupported checkpoint version " + std::to_string(version) + " at byte 4 (expected " +
                      std::to_string(kCheckpointVersion) + ")");
  }
  Checkpoint c;
  c.config_json = r.str();
  c.step = r.u64();
  c.adam.step = c.step;
  const auto count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto at = r.pos();
    auto name = r.str();
    auto value = r.array();
    auto& target = name.starts_with(kMomentPrefix)     ? c.adam.m
                   : name.starts_with(kVariancePrefix) ? c.adam.v
                                                       : c.params;
    if (&target != &c.params) name = name.substr(kMomentPrefix.size());
    if (target.contains(name)) throw FormatError(origin + ": duplicate record '" + name + "' at byte " + std::to_string(at));
    target.insert(std::move(name), std::move(value));
  }
  if (!r.done()) throw FormatError(origin + ": trailing data at byte " + std::to_string(r.pos()));
  return c;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const auto bytes = serialize_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError(path.string() + ": cannot open for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError(path.string() + ": write failed");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string() + ": cannot open");
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return deserialize_checkpoint(bytes, path.string());
}

nn::ParamStore round_to_float(const nn::ParamStore& params) {
  nn::ParamStore out;
  for (const auto& [name, value] : params) {
    ndgrad::Array a = value;
    for (auto& v : a.values()) v = static_cast<float>(v);
    out.insert(name, std::move(a));
  }
  return out;
}

}  // namespace bhivae::runner
