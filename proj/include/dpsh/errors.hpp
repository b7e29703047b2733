//
// Copyright 2026 The dpsh Authors
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
//

#ifndef DPSH_ERRORS_HPP_
#define DPSH_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace dpsh {

// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An argument is outside the documented domain (NaN, non-positive sigma, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A mechanism precondition does not hold, e.g. a histogram denser than the
// sparsity bound handed to the correlated mechanism.
class PreconditionViolation : public Error {
 public:
  using Error::Error;
};

// The requested privacy target cannot be met. `floor()` is the part of delta
// that no choice of threshold can remove.
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, double floor)
      : Error(what), floor_(floor) {}

  double floor() const { return floor_; }

 private:
  double floor_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace dpsh

#endif  // DPSH_ERRORS_HPP_
