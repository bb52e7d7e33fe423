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

#include "bhivae/nn/params.hpp"

#include "bhivae/errors.hpp"

namespace bhivae::nn {

void ParamStore::insert(std::string name, Array value) { params_.insert_or_assign(std::move(name), std::move(value)); }

const Array& ParamStore::at(std::string_view name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw ValidationError("unknown parameter '" + std::string(name) + "'");
  return it->second;
}

Array& ParamStore::at(std::string_view name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw ValidationError("unknown parameter '" + std::string(name) + "'");
  return it->second;
}

std::vector<std::string> ParamStore::names(std::string_view prefix) const {
  std::vector<std::string> out;
  for (const auto& [name, _] : params_) {
    if (name.starts_with(prefix)) out.push_back(name);
  }
  return out;
}

std::int64_t ParamStore::parameter_count() const {
  std::int64_t n = 0;
  for (const auto& [_, a] : params_) n += a.size();
  return n;
}

ParamNodes declare(ndgrad::Graph& graph, const ParamStore& params) {
  ParamNodes nodes;
  for (const auto& [name, value] : params) nodes.emplace(name, graph.input(name, value.shape()));
  return nodes;
}

void bind(ndgrad::Bindings& bindings, const ParamStore& params) {
  for (const auto& [name, value] : params) bindings.set_ref(name, value);
}

NodeId lookup(const ParamNodes& nodes, std::string_view name) {
  auto it = nodes.find(name);
  if (it == nodes.end()) throw ValidationError("graph has no parameter node '" + std::string(name) + "'");
  return it->second;
}

}  // namespace bhivae::nn
