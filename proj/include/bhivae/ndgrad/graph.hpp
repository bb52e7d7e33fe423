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

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bhivae/ndgrad/array.hpp"

namespace bhivae::ndgrad {

enum class OpKind : std::uint8_t {
  kInput,
  kMatMul,
  kAdd,
  kMul,
  kRelu,
  kTanh,
  kSigmoid,
  kExp,
  kLog,
  kNegate,
  kScale,
  kAddScalar,
  kReduceSum,
  kReduceMean,
  kConcat,
  kSlice,
  kSoftmax,
  kLogSumExp,
  kStopGradient,
  kGatherRows,
  kClamp,
};

std::string_view op_name(OpKind kind);

struct NodeId {
  std::uint32_t index = 0;
  auto operator<=>(const NodeId&) const = default;
};

enum class Axis : std::uint8_t {
  kAll,   // reduce every element to a scalar
  kLast,  // reduce the last axis only
};

struct Node {
  OpKind kind = OpKind::kInput;
  std::vector<NodeId> inputs;
  Shape shape;
  std::string name;
  double lo = 0.0;  // scale factor, scalar offset, or clamp lower bound
  double hi = 0.0;  // clamp upper bound
  std::int64_t begin = 0;
  std::int64_t end = 0;
  Axis axis = Axis::kAll;
};

/// Define-then-run computation graph. Nodes are appended in topological order
/// and shape-checked at construction; a bad shape throws ValidationError
/// naming the offending node.
class Graph {
 public:
  NodeId input(std::string name, Shape shape);

  NodeId matmul(NodeId a, NodeId b);
  /// Elementwise add. `b` may also be a vector matching the last axis of `a`
  /// (bias broadcast over the leading batch axis).
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b) { return add(a, negate(b)); }
  NodeId mul(NodeId a, NodeId b);
  NodeId relu(NodeId a) { return unary(OpKind::kRelu, a); }
  NodeId tanh(NodeId a) { return unary(OpKind::kTanh, a); }
  NodeId sigmoid(NodeId a) { return unary(OpKind::kSigmoid, a); }
  NodeId exp(NodeId a) { return unary(OpKind::kExp, a); }
  NodeId log(NodeId a) { return unary(OpKind::kLog, a); }
  NodeId negate(NodeId a) { return unary(OpKind::kNegate, a); }
  NodeId stop_gradient(NodeId a) { return unary(OpKind::kStopGradient, a); }
  NodeId scale(NodeId a, double factor);
  NodeId add_scalar(NodeId a, double offset);
  NodeId clamp(NodeId a, double lo, double hi);

  NodeId reduce_sum(NodeId a, Axis axis = Axis::kAll);
  NodeId reduce_mean(NodeId a, Axis axis = Axis::kAll);

  NodeId concat(std::span<const NodeId> parts);
  NodeId concat(std::initializer_list<NodeId> parts) { return concat(std::span(parts.begin(), parts.size())); }
  /// Columns [begin, end) of the last axis.
  NodeId slice(NodeId a, std::int64_t begin, std::int64_t end);

  /// Row-wise softmax over the last axis.
  NodeId softmax(NodeId a);
  /// Row-wise log(sum(exp(a))) over the last axis; drops that axis.
  NodeId log_sum_exp(NodeId a);

  /// Rows of a rank-2 `a` selected by a rank-1 index array (integral values).
  /// Not differentiable with respect to the indices.
  NodeId gather_rows(NodeId a, NodeId indices);

  void set_output(std::string name, NodeId id);
  void set_name(NodeId id, std::string name);

  const Node& node(NodeId id) const;
  const Shape& shape(NodeId id) const { return node(id).shape; }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<std::pair<std::string, NodeId>>& outputs() const { return outputs_; }
  std::optional<NodeId> find_input(std::string_view name) const;
  std::vector<NodeId> inputs() const;

 private:
  NodeId unary(OpKind kind, NodeId a);
  NodeId reduce(OpKind kind, NodeId a, Axis axis);
  NodeId push(Node node);
  void check(NodeId id) const;
  std::string next_name(OpKind kind) const;

  std::vector<Node> nodes_;
  std::vector<std::pair<std::string, NodeId>> outputs_;
};

/// Name -> array bindings for a graph's input nodes. `set_ref` binds without
/// copying; the referenced array must outlive every Evaluation built from it.
class Bindings {
 public:
  void set(std::string name, Array value);
  void set_ref(std::string name, const Array& value);
  const Array* find(std::string_view name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, Array, std::less<>> owned_;
  std::map<std::string, const Array*, std::less<>> refs_;
};

/// Forward values of every node of a graph for one set of bindings.
class Evaluation {
 public:
  Evaluation(Evaluation&&) = default;
  Evaluation& operator=(Evaluation&&) = default;
  Evaluation(const Evaluation&) = delete;
  Evaluation& operator=(const Evaluation&) = delete;

  const Graph& graph() const { return *graph_; }
  const Array& value(NodeId id) const { return *values_.at(id.index); }
  double scalar(NodeId id) const { return value(id).item(); }
  std::map<std::string, Array> outputs() const;

 private:
  friend Evaluation evaluate(const Graph& graph, const Bindings& bindings);
  explicit Evaluation(const Graph& graph);

  const Graph* graph_;
  std::vector<Array> owned_;
  std::vector<const Array*> values_;
};

/// Runs the forward pass. Throws ValidationError for unbound or mis-shaped
/// inputs and NumericalError naming the first node that produced a non-finite
/// value.
Evaluation evaluate(const Graph& graph, const Bindings& bindings);

using GradientMap = std::map<NodeId, Array>;

/// Reverse-mode gradients of a scalar node with respect to `wrt`. Only nodes
/// on a path from some `wrt` node to `output` are visited.
GradientMap gradients(const Evaluation& forward, NodeId output, std::span<const NodeId> wrt);

/// Worst per-coordinate relative error between gradients() and central
/// differences over the given input nodes (all inputs when `wrt` is empty).
double finite_difference_check(const Graph& graph, NodeId output, const Bindings& point, double eps,
                               std::span<const NodeId> wrt = {});

}  // namespace bhivae::ndgrad
