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

double finite_difference_check(const Graph& graph, NodeId output, const Bindings& point, double eps,
                               std::span<const NodeId> wrt) {
  if (!(eps > 0.0)) throw ValidationError("finite-difference step must be positive");
  std::vector<NodeId> targets(wrt.begin(), wrt.end());
  if (targets.empty()) targets = graph.inputs();
  for (auto id : targets) {
    if (graph.node(id).kind != OpKind::kInput) {
      throw ContractError("finite differences perturb input nodes only; '" + graph.node(id).name + "' is not one");
    }
  }

  const auto analytic = gradients(evaluate(graph, point), output, targets);

  // Private copies of the perturbed inputs; everything else stays bound by reference.
  Bindings work;
  for (const auto& name : point.names()) work.set_ref(name, *point.find(name));
  double worst = 0.0;
  for (auto id : targets) {
    const std::string& name = graph.node(id).name;
    Array probe = *point.find(name);
    work.set_ref(name, probe);
    const Array& grad = analytic.at(id);
    for (std::int64_t k = 0; k < probe.size(); ++k) {
      const double saved = probe.values()[k];
      probe.values()[k] = saved + eps;
      const double up = evaluate(graph, work).scalar(output);
      probe.values()[k] = saved - eps;
      const double down = evaluate(graph, work).scalar(output);
      probe.values()[k] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double exact = grad.values()[k];
      const double denom = std::max({std::abs(exact), std::abs(numeric), 1e-8});
      worst = std::max(worst, std::abs(exact - numeric) / denom);
    }
    work.set_ref(name, *point.find(name));
  }
  return worst;
}

}  // namespace bhivae::ndgrad
