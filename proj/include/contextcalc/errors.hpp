// Copyright 2026 The contextcalc Authors
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

#ifndef CONTEXTCALC_ERRORS_HPP
#define CONTEXTCALC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace contextcalc {

/// Raised when a caller violates a documented precondition (shape, dimension,
/// Hermiticity, unknown label, ...).
class ContractError : public std::invalid_argument {
   public:
    explicit ContractError(const std::string &what) : std::invalid_argument(what) {}
};

/// Raised when input data (a theory file, a table row) fails validation.
/// `code` is a stable machine-readable tag; `location` names the offending item.
class ValidationError : public std::runtime_error {
   public:
    ValidationError(std::string code, std::string location, const std::string &message)
        : std::runtime_error(code + " at " + location + ": " + message),
          code_(std::move(code)),
          location_(std::move(location)) {}

    const std::string &code() const { return code_; }
    const std::string &location() const { return location_; }

   private:
    std::string code_;
    std::string location_;
};

/// Raised when an iterative or LP method fails to produce a trustworthy answer.
class NumericalError : public std::runtime_error {
   public:
    explicit NumericalError(const std::string &what) : std::runtime_error(what) {}
};

}  // namespace contextcalc

#endif
