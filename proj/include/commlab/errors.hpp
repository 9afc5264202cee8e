// Copyright 2026 The CommLab Authors
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

namespace commlab {

/// Operand shapes do not agree (cut dimensions, alphabet sizes, ...).
struct DimensionMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A value violates a type invariant (non-PSD matrix, unnormalized
/// distribution, non-unitary gate, ...).
struct InvalidState : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// An operation precondition does not hold (singular reference state,
/// weight above the substate bound, parameter out of range, ...).
struct PreconditionError : std::domain_error {
    using std::domain_error::domain_error;
};

/// A simulation would exceed a configured resource cap.
struct BudgetExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace commlab
