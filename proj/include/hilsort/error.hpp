// Copyright 2026 The hilsort Authors.
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
#include <utility>
#include <vector>

namespace hilsort {

// Malformed or inconsistent caller-supplied data. `details` carries
// field-level diagnostics (e.g. the offending item ids).
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what,
                      std::vector<std::string> details = {})
      : std::invalid_argument(what), details_(std::move(details)) {}

  const std::vector<std::string>& details() const noexcept { return details_; }

 private:
  std::vector<std::string> details_;
};

// Operation is not valid in the object's current state.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A judgment that does not match the outstanding request.
class ConflictError : public StateError {
 public:
  using StateError::StateError;
};

class NotFoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hilsort
