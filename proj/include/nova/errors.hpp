// Copyright 2026 The nova-infer Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace nova {

// Base of every error thrown by the library. The CLI maps each subclass to a
// fixed process exit code (see tools/nova.cpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A public operation received arguments outside its domain.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

// A configuration value violates an invariant. `field()` names the offender.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// An API was called out of its protocol order (e.g. out-of-order trace append).
class UsageError : public Error {
 public:
  using Error::Error;
};

// Engine bookkeeping is inconsistent. Indicates a bug, never bad user input.
class InternalStateError : public Error {
 public:
  using Error::Error;
};

// Mean entropy was non-positive where a relative deviation is needed.
class DegenerateEntropyError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace nova
