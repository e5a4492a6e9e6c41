// Copyright 2026 The Authors.
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

namespace sns {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file or unparseable text.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Invariant violations and inconsistent arguments (dimension mismatches,
/// out-of-range indices, bad configuration values).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Failures of the numerics: Newton non-convergence, singular linear
/// systems, non-finite states, factorization breakdowns.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace sns
