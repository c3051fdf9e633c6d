// Copyright 2026 The etsim Authors
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

#ifndef ETSIM_ERRORS_HPP_
#define ETSIM_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace etsim {

// Each error class maps onto one CLI exit code / C API status.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed arguments, mismatched Hilbert spaces, bad shapes.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Missing / unknown / ill-typed configuration keys.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Physically inconsistent input: resonant drives, negative rates, unresolved
// time steps.
class PhysicsError : public Error {
 public:
  using Error::Error;
};

// An iterative method stopped before reaching its target.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Files that cannot be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace etsim

#endif  // ETSIM_ERRORS_HPP_
