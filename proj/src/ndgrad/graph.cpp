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

#include <sstream>

#include "bhivae/errors.hpp"
#include "bhivae/ndgrad/graph.hpp"

namespace bhivae::ndgrad {

std::string_view op_name(OpKind kind) {
  switch (kind) {
    case OpKind::kInput: return "input";
    case OpKind::kMatMul: return "matmul";
    case OpKind::kAdd: return "add";
    case OpKind::kMul: return "mul";
    case OpKind::kRelu: return "relu";
    case OpKind::kTanh: return "tanh";
    case OpKind::kSigmoid: return "sigmoid";
    case OpKind::kExp: return "exp";
    case OpKind::kLog: return "log";
    case OpKind::kNegate: return "negate";
    case OpKind::kScale: return "scale";
    case OpKind::kAddScalar: return "add_scalar";
    case OpKind::kReduceSum: return "reduce_sum";
    case OpKind::kReduceMean: return "reduce_mean";
    case OpKind::kConcat: return "concat";
    case OpKind::kSlice: return "slice";
    case OpKind::kSoftmax: return "softmax";
    case OpKind::kLogSumExp: return "log_sum_exp";
    case OpKind::kStopGradient: return "stop_gradient";
    case OpKind::kGatherRows: return "gather_rows";
    case OpKind::kClamp: return "clamp";
  }
  return "unknown";
}

namespace {

Shape drop_last(const Shape& s) { return Shape(s.begin(), s.end() - 1); }

[[noreturn]] void fail(const std::string& node, const std::string& what) {
  throw ValidationError("node '" + node + "': " + what);
}

}  // namespace

std::string Graph::next_name(OpKind kind) const {
  std::ostringstream os;
  os << op_name(kind) << '#' << nodes_.size();
  return os.str();
}

void Graph::check(NodeId id) const {
  if (id.index >= nodes_.size()) {
    throw ValidationError("node id " + std::to_string(id.index) + " does not belong to this graph");
  }
}

const Node& Graph::node(NodeId id) const {
  check(id);
  return nodes_[id.index];
}

NodeId Graph::push(Node node) {
  for (auto in : node.inputs) check(in);
  nodes_.push_back(std::move(node));
  return NodeId{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

NodeId Graph::input(std::string name, Shape shape) {
  if (find_input(name)) fail(name, "duplicate input name");
  for (auto d : shape) {
    if (d <= 0) fail(name, "input shape " + to_string(shape) + " has a non-positive extent");
  }
  Node n;
  n.kind = OpKind::kInput;
  n.shape = std::move(shape);
  n.name = std::move(name);
  return push(std::move(n));
}

NodeId Graph::matmul(NodeId a, NodeId b) {
  const auto name = next_name(OpKind::kMatMul);
  const auto& sa = shape(a);
  const auto& sb = shape(b);
  if (sa.size() != 2 || sb.size() != 2 || sa[1] != sb[0]) {
    fail(name, "cannot multiply " + to_string(sa) + " by " + to_string(sb));
  }
  return push({.kind = OpKind::kMatMul, .inputs = {a, b}, .shape = {sa[0], sb[1]}, .name = name});
}

NodeId Graph::add(NodeId a, NodeId b) {
  const auto name = next_name(OpKind::kAdd);
  const auto& sa = shape(a);
  const auto& sb = shape(b);
  const bool same = sa == sb;
  const bool bias = sa.size() >= 2 && sb.size() == 1 && sb[0] == sa.back();
  if (!same && !bias) fail(name, "cannot add " + to_string(sa) + " and " + to_string(sb));
  return push({.kind = OpKind::kAdd, .inputs = {a, b}, .shape = sa, .name = name});
}

NodeId Graph::mul(NodeId a, NodeId b) {
  const auto name = next_name(OpKind::kMul);
  if (shape(a) != shape(b)) {
    fail(name, "elementwise product of " + to_string(shape(a)) + " and " + to_string(shape(b)));
  }
  return push({.kind = OpKind::kMul, .inputs = {a, b}, .shape = shape(a), .name = name});
}

NodeId Graph::unary(OpKind kind, NodeId a) {
  return push({.kind = kind, .inputs = {a}, .shape = shape(a), .name = next_name(kind)});
}

NodeId Graph::scale(NodeId a, double factor) {
  auto id = unary(OpKind::kScale, a);
  nodes_[id.index].lo = factor;
  return id;
}

NodeId Graph::add_scalar(NodeId a, double offset) {
  auto id = unary(OpKind::kAddScalar, a);
  nodes_[id.index].lo = offset;
  return id;
}

NodeId Graph::clamp(NodeId a, double lo, double hi) {
  const auto name = next_name(OpKind::kClamp);
  if (!(lo < hi)) fail(name, "clamp bounds must satisfy lo < hi");
  return push({.kind = OpKind::kClamp, .inputs = {a}, .shape = shape(a), .name = name, .lo = lo, .hi = hi});
}

NodeId Graph::reduce(OpKind kind, NodeId a, Axis axis) {
  const auto name = next_name(kind);
  const auto& sa = shape(a);
  Shape out;
  if (axis == Axis::kLast) {
    if (sa.empty()) fail(name, "cannot reduce the last axis of a scalar");
    out = drop_last(sa);
  }
  return push({.kind = kind, .inputs = {a}, .shape = out, .name = name, .axis = axis});
}

NodeId Graph::reduce_sum(NodeId a, Axis axis) { return reduce(OpKind::kReduceSum, a, axis); }
NodeId Graph::reduce_mean(NodeId a, Axis axis) { return reduce(OpKind::kReduceMean, a, axis); }

NodeId Graph::concat(std::span<const NodeId> parts) {
  const auto name = next_name(OpKind::kConcat);
  if (parts.empty()) fail(name, "concat of zero arrays");
  const auto& first = shape(parts[0]);
  if (first.empty()) fail(name, "cannot concatenate scalars");
  Shape out = first;
  out.back() = 0;
  for (auto p : parts) {
    const auto& sp = shape(p);
    if (sp.size() != first.size() || drop_last(sp) != drop_last(first)) {
      fail(name, "concat of " + to_string(first) + " with " + to_string(sp));
    }
    out.back() += sp.back();
  }
  return push({.kind = OpKind::kConcat, .inputs = {parts.begin(), parts.end()}, .shape = out, .name = name});
}

NodeId Graph::slice(NodeId a, std::int64_t begin, std::int64_t end) {
  const auto name = next_name(OpKind::kSlice);
  const auto& sa = shape(a);
  if (sa.empty() || begin < 0 || end > sa.back() || begin >= end) {
    fail(name, "slice [" + std::to_string(begin) + "," + std::to_string(end) + ") of " + to_string(sa));
  }
  Shape out = sa;
  out.back() = end - begin;
  return push({.kind = OpKind::kSlice, .inputs = {a}, .shape = out, .name = name, .begin = begin, .end = end});
}

NodeId Graph::softmax(NodeId a) {
  const auto name = next_name(OpKind::kSoftmax);
  if (shape(a).empty()) fail(name, "softmax of a scalar");
  return push({.kind = OpKind::kSoftmax, .inputs = {a}, .shape = shape(a), .name = name});
}

NodeId Graph::log_sum_exp(NodeId a) {
  const auto name = next_name(OpKind::kLogSumExp);
  if (shape(a).empty()) fail(name, "log-sum-exp of a scalar");
  return push({.kind = OpKind::kLogSumExp, .inputs = {a}, .shape = drop_last(shape(a)), .name = name});
}

NodeId Graph::gather_rows(NodeId a, NodeId indices) {
  const auto name = next_name(OpKind::kGatherRows);
  const auto& sa = shape(a);
  const auto& si = shape(indices);
  if (sa.size() != 2 || si.size() != 1) {
    fail(name, "gather_rows needs a matrix and an index vector, got " + to_string(sa) + " and " + to_string(si));
  }
  return push({.kind = OpKind::kGatherRows, .inputs = {a, indices}, .shape = {si[0], sa[1]}, .name = name});
}

void Graph::set_output(std::string name, NodeId id) {
  check(id);
  for (auto& [n, node] : outputs_) {
    if (n == name) {
      node = id;
      return;
    }
  }
  outputs_.emplace_back(std::move(name), id);
}

void Graph::set_name(NodeId id, std::string name) {
  check(id);
  if (nodes_[id.index].kind == OpKind::kInput) throw ContractError("input nodes keep their binding name");
  nodes_[id.index].name = std::move(name);
}

std::optional<NodeId> Graph::find_input(std::string_view name) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].kind == OpKind::kInput && nodes_[i].name == name) return NodeId{static_cast<std::uint32_t>(i)};
  }
  return std::nullopt;
}

std::vector<NodeId> Graph::inputs() const {
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].kind == OpKind::kInput) out.push_back(NodeId{static_cast<std::uint32_t>(i)});
  }
  return out;
}

void Bindings::set(std::string name, Array value) {
  refs_.erase(name);
  owned_.insert_or_assign(std::move(name), std::move(value));
}

void Bindings::set_ref(std::string name, const Array& value) {
  owned_.erase(name);
  refs_.insert_or_assign(std::move(name), &value);
}

const Array* Bindings::find(std::string_view name) const {
  if (auto it = owned_.find(name); it != owned_.end()) return &it->second;
  if (auto it = refs_.find(name); it != refs_.end()) return it->second;
  return nullptr;
}

std::vector<std::string> Bindings::names() const {
  std::vector<std::string> out;
  for (const auto& [n, _] : owned_) out.push_back(n);
  for (const auto& [n, _] : refs_) out.push_back(n);
  return out;
}

}  // namespace bhivae::ndgrad
