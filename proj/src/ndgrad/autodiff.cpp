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

#include "bhivae/errors.hpp"
#include "bhivae/ndgrad/graph.hpp"

namespace bhivae::ndgrad {

namespace {

using RowMap = Eigen::Map<Matrix>;
using ConstRowMap = Eigen::Map<const Matrix>;

// Reshape a flat row-major buffer of `count` values into the view of `shape`.
Array from_flat(const Shape& shape, const double* data) {
  Array out(shape);
  std::copy(data, data + out.size(), out.matrix().data());
  return out;
}

Matrix row_softmax(const Matrix& a) {
  Matrix out = a;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    row.array() -= row.maxCoeff();
    row = row.array().exp().matrix();
    row /= row.sum();
  }
  return out;
}

Eigen::VectorXd row_lse(const Matrix& a) {
  Eigen::VectorXd out(a.rows());
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    const double m = a.row(r).maxCoeff();
    out(r) = m + std::log((a.row(r).array() - m).exp().sum());
  }
  return out;
}

std::int64_t checked_index(double v, std::int64_t limit, const Node& node) {
  const double r = std::round(v);
  if (r != v || r < 0 || r >= static_cast<double>(limit)) {
    throw ValidationError("node '" + node.name + "': row index " + std::to_string(v) + " outside [0," +
                          std::to_string(limit) + ")");
  }
  return static_cast<std::int64_t>(r);
}

Array forward(const Node& node, const std::vector<const Array*>& values) {
  auto in = [&](std::size_t k) -> const Matrix& { return values[node.inputs[k].index]->matrix(); };
  Array out(node.shape);
  Matrix& o = out.matrix();
  switch (node.kind) {
    case OpKind::kInput:
      break;
    case OpKind::kMatMul:
      o.noalias() = in(0) * in(1);
      break;
    case OpKind::kAdd:
      if (in(1).rows() == in(0).rows() && in(1).cols() == in(0).cols()) {
        o = in(0) + in(1);
      } else {
        o = in(0).rowwise() + in(1).row(0);
      }
      break;
    case OpKind::kMul:
      o = in(0).cwiseProduct(in(1));
      break;
    case OpKind::kRelu:
      o = in(0).cwiseMax(0.0);
      break;
    case OpKind::kTanh:
      o = in(0).array().tanh().matrix();
      break;
    case OpKind::kSigmoid:
      o = (1.0 / (1.0 + (-in(0).array()).exp())).matrix();
      break;
    case OpKind::kExp:
      o = in(0).array().exp().matrix();
      break;
    case OpKind::kLog:
      o = in(0).array().log().matrix();
      break;
    case OpKind::kNegate:
      o = -in(0);
      break;
    case OpKind::kScale:
      o = node.lo * in(0);
      break;
    case OpKind::kAddScalar:
      o = (in(0).array() + node.lo).matrix();
      break;
    case OpKind::kClamp:
      o = in(0).cwiseMax(node.lo).cwiseMin(node.hi);
      break;
    case OpKind::kStopGradient:
      o = in(0);
      break;
    case OpKind::kReduceSum:
    case OpKind::kReduceMean: {
      const double div = node.kind == OpKind::kReduceMean
                             ? static_cast<double>(node.axis == Axis::kAll ? in(0).size() : in(0).cols())
                             : 1.0;
      if (node.axis == Axis::kAll) {
        o(0, 0) = in(0).sum() / div;
      } else {
        Eigen::VectorXd sums = in(0).rowwise().sum() / div;
        out = from_flat(node.shape, sums.data());
      }
      break;
    }
    case OpKind::kConcat: {
      Eigen::Index col = 0;
      for (std::size_t k = 0; k < node.inputs.size(); ++k) {
        o.middleCols(col, in(k).cols()) = in(k);
        col += in(k).cols();
      }
      break;
    }
    case OpKind::kSlice:
      o = in(0).middleCols(node.begin, node.end - node.begin);
      break;
    case OpKind::kSoftmax:
      o = row_softmax(in(0));
      break;
    case OpKind::kLogSumExp: {
      Eigen::VectorXd l = row_lse(in(0));
      out = from_flat(node.shape, l.data());
      break;
    }
    case OpKind::kGatherRows: {
      const Matrix& idx = in(1);
      for (Eigen::Index r = 0; r < idx.cols(); ++r) {
        o.row(r) = in(0).row(checked_index(idx(0, r), in(0).rows(), node));
      }
      break;
    }
  }
  return out;
}

// Accumulates the adjoint contribution of `node` into its inputs.
void backward(const Node& node, const Evaluation& ev, const Array& output, const Matrix& adj,
              std::vector<Matrix>& adjoints, const std::vector<bool>& wanted) {
  auto in = [&](std::size_t k) -> const Matrix& { return ev.value(node.inputs[k]).matrix(); };
  auto accumulate = [&](std::size_t k, const auto& contribution) {
    const auto idx = node.inputs[k].index;
    if (!wanted[idx]) return;
    Matrix& target = adjoints[idx];
    if (target.size() == 0) {
      target = contribution;
    } else {
      target += contribution;
    }
  };
  const Matrix& y = output.matrix();
  switch (node.kind) {
    case OpKind::kInput:
    case OpKind::kStopGradient:
      break;
    case OpKind::kMatMul:
      if (wanted[node.inputs[0].index]) accumulate(0, Matrix(adj * in(1).transpose()));
      if (wanted[node.inputs[1].index]) accumulate(1, Matrix(in(0).transpose() * adj));
      break;
    case OpKind::kAdd:
      accumulate(0, adj);
      if (in(1).rows() == adj.rows() && in(1).cols() == adj.cols()) {
        accumulate(1, adj);
      } else {
        accumulate(1, Matrix(adj.colwise().sum()));
      }
      break;
    case OpKind::kMul:
      accumulate(0, Matrix(adj.cwiseProduct(in(1))));
      accumulate(1, Matrix(adj.cwiseProduct(in(0))));
      break;
    case OpKind::kRelu:
      accumulate(0, Matrix((in(0).array() > 0.0).select(adj, 0.0)));
      break;
    case OpKind::kTanh:
      accumulate(0, Matrix(adj.array() * (1.0 - y.array().square())));
      break;
    case OpKind::kSigmoid:
      accumulate(0, Matrix(adj.array() * y.array() * (1.0 - y.array())));
      break;
    case OpKind::kExp:
      accumulate(0, Matrix(adj.cwiseProduct(y)));
      break;
    case OpKind::kLog:
      accumulate(0, Matrix(adj.cwiseQuotient(in(0))));
      break;
    case OpKind::kNegate:
      accumulate(0, Matrix(-adj));
      break;
    case OpKind::kScale:
      accumulate(0, Matrix(node.lo * adj));
      break;
    case OpKind::kAddScalar:
      accumulate(0, adj);
      break;
    case OpKind::kClamp:
      accumulate(0, Matrix((in(0).array() > node.lo && in(0).array() < node.hi).select(adj, 0.0)));
      break;
    case OpKind::kReduceSum:
    case OpKind::kReduceMean: {
      const Matrix& a = in(0);
      const double div = node.kind == OpKind::kReduceMean
                             ? static_cast<double>(node.axis == Axis::kAll ? a.size() : a.cols())
                             : 1.0;
      if (node.axis == Axis::kAll) {
        accumulate(0, Matrix::Constant(a.rows(), a.cols(), adj(0, 0) / div));
      } else {
        ConstRowMap flat(adj.data(), a.rows(), 1);
        accumulate(0, Matrix(flat.replicate(1, a.cols()) / div));
      }
      break;
    }
    case OpKind::kConcat: {
      Eigen::Index col = 0;
      for (std::size_t k = 0; k < node.inputs.size(); ++k) {
        const auto w = in(k).cols();
        accumulate(k, Matrix(adj.middleCols(col, w)));
        col += w;
      }
      break;
    }
    case OpKind::kSlice: {
      Matrix g = Matrix::Zero(in(0).rows(), in(0).cols());
      g.middleCols(node.begin, node.end - node.begin) = adj;
      accumulate(0, g);
      break;
    }
    case OpKind::kSoftmax: {
      Eigen::VectorXd dot = adj.cwiseProduct(y).rowwise().sum();
      accumulate(0, Matrix(y.array() * (adj.colwise() - dot).array()));
      break;
    }
    case OpKind::kLogSumExp: {
      Matrix p = row_softmax(in(0));
      ConstRowMap flat(adj.data(), p.rows(), 1);
      accumulate(0, Matrix(p.array().colwise() * flat.col(0).array()));
      break;
    }
    case OpKind::kGatherRows: {
      if (!wanted[node.inputs[0].index]) break;
      Matrix g = Matrix::Zero(in(0).rows(), in(0).cols());
      const Matrix& idx = in(1);
      for (Eigen::Index r = 0; r < idx.cols(); ++r) {
        g.row(static_cast<Eigen::Index>(idx(0, r))) += adj.row(r);
      }
      accumulate(0, g);
      break;
    }
  }
}

}  // namespace

Evaluation::Evaluation(const Graph& graph)
    : graph_(&graph), owned_(graph.size()), values_(graph.size(), nullptr) {}

std::map<std::string, Array> Evaluation::outputs() const {
  std::map<std::string, Array> out;
  for (const auto& [name, id] : graph_->outputs()) out.emplace(name, value(id));
  return out;
}

Evaluation evaluate(const Graph& graph, const Bindings& bindings) {
  Evaluation ev(graph);
  for (std::uint32_t i = 0; i < graph.size(); ++i) {
    const Node& node = graph.node(NodeId{i});
    if (node.kind == OpKind::kInput) {
      const Array* bound = bindings.find(node.name);
      if (!bound) throw ValidationError("input '" + node.name + "' is not bound");
      if (bound->shape() != node.shape) {
        throw ValidationError("input '" + node.name + "' expects shape " + to_string(node.shape) + ", got " +
                              to_string(bound->shape()));
      }
      if (!bound->all_finite()) throw NumericalError("input '" + node.name + "' holds non-finite values");
      ev.values_[i] = bound;
      continue;
    }
    ev.owned_[i] = forward(node, ev.values_);
    if (!ev.owned_[i].all_finite()) {
      throw NumericalError("node '" + node.name + "' produced a non-finite value");
    }
    ev.values_[i] = &ev.owned_[i];
  }
  return ev;
}

GradientMap gradients(const Evaluation& forward_pass, NodeId output, std::span<const NodeId> wrt) {
  const Graph& graph = forward_pass.graph();
  if (!graph.shape(output).empty()) {
    throw ContractError("gradients() needs a scalar output; node '" + graph.node(output).name + "' has shape " +
                        to_string(graph.shape(output)));
  }
  const std::size_t n = graph.size();
  // wanted[i]: node i lies downstream of some requested node, so its adjoint
  // can reach a requested node.
  std::vector<bool> wanted(n, false);
  for (auto id : wrt) {
    (void)graph.node(id);
    wanted[id.index] = true;
  }
  for (std::uint32_t i = 0; i < n; ++i) {
    const Node& node = graph.node(NodeId{i});
    if (wanted[i] || node.kind == OpKind::kStopGradient) continue;
    for (std::size_t k = 0; k < node.inputs.size(); ++k) {
      if (node.kind == OpKind::kGatherRows && k == 1) continue;
      if (wanted[node.inputs[k].index]) {
        wanted[i] = true;
        break;
      }
    }
  }

  std::vector<Matrix> adjoints(n);
  if (wanted[output.index]) adjoints[output.index] = Matrix::Ones(1, 1);
  for (std::int64_t i = output.index; i >= 0; --i) {
    if (!wanted[i] || adjoints[i].size() == 0) continue;
    const Node& node = graph.node(NodeId{static_cast<std::uint32_t>(i)});
    backward(node, forward_pass, forward_pass.value(NodeId{static_cast<std::uint32_t>(i)}), adjoints[i], adjoints,
             wanted);
  }

  GradientMap out;
  for (auto id : wrt) {
    Array g(graph.shape(id));
    if (adjoints[id.index].size() != 0) g.matrix() = adjoints[id.index];
    out.insert_or_assign(id, std::move(g));
  }
  return out;
}

}  // namespace bhivae::ndgrad
