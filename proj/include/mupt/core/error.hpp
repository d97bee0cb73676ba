// Copyright 2026 The mupt Authors
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

namespace mupt {

// Violated precondition or invariant of a public operation.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ShapeError : public ContractError {
 public:
  using ContractError::ContractError;
};

// NaN/Inf or an empty distribution support.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed file: checkpoint, config, or CSV.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mupt
