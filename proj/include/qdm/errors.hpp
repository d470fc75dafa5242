// Copyright 2026 The qdm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace qdm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand dimensions do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Hilbert space or enumeration larger than the configured maximum.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Precondition on a scalar argument or distribution failed.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A numerical invariant (Hermiticity, trace, CPTP, unitarity) does not hold.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

/// A gate offered as a Clifford does not map Weyl operators to Weyl operators.
class NormalizerViolation : public InvariantViolation {
 public:
  using InvariantViolation::InvariantViolation;
};

/// Matrix inversion requested on a (numerically) singular matrix.
class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

/// Malformed document: circuit, noise model or experiment config.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Invalid experiment or CLI configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace qdm
