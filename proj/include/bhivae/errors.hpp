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

#include <stdexcept>
#include <string>

namespace bhivae {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes, widths, indices or other structural preconditions do not hold.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A computation produced a non-finite value or hit a singular matrix.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// The caller broke an API contract (e.g. asked for the gradient of a non-scalar).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Malformed bytes in a file format (IDX, checkpoint).
class FormatError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

}  // namespace bhivae
