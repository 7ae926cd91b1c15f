// Copyright 2026 The cqsw Authors
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

namespace cqsw {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input failed a documented invariant (Hermiticity, trace, probability sum, schema).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Operands have incompatible shapes.
class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A dense dimension or enumeration exceeded its configured cap.
class CapExceeded : public Error {
 public:
  using Error::Error;
};

/// A numerical construction (decoder, code) could not be completed.
class ConstructionError : public Error {
 public:
  explicit ConstructionError(const std::string& what, double offending_value = 0.0)
      : Error(what), offending_value_(offending_value) {}

  double offending_value() const noexcept { return offending_value_; }

 private:
  double offending_value_;
};

}  // namespace cqsw
