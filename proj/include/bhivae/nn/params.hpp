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

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "bhivae/ndgrad/graph.hpp"

namespace bhivae::nn {

using ndgrad::Array;
using ndgrad::NodeId;

/// Named parameter arrays, ordered by name.
class ParamStore {
 public:
  using Map = std::map<std::string, Array, std::less<>>;

  void insert(std::string name, Array value);
  const Array& at(std::string_view name) const;
  Array& at(std::string_view name);
  bool contains(std::string_view name) const { return params_.find(name) != params_.end(); }
  std::vector<std::string> names(std::string_view prefix = {}) const;
  std::size_t size() const { return params_.size(); }
  std::int64_t parameter_count() const;

  Map::const_iterator begin() const { return params_.begin(); }
  Map::const_iterator end() const { return params_.end(); }
  Map::iterator begin() { return params_.begin(); }
  Map::iterator end() { return params_.end(); }

  friend bool operator==(const ParamStore&, const ParamStore&) = default;

 private:
  Map params_;
};

using ParamNodes = std::map<std::string, NodeId, std::less<>>;

/// Adds one graph input per parameter, named after it.
ParamNodes declare(ndgrad::Graph& graph, const ParamStore& params);
/// Binds every parameter by reference.
void bind(ndgrad::Bindings& bindings, const ParamStore& params);
NodeId lookup(const ParamNodes& nodes, std::string_view name);

}  // namespace bhivae::nn
