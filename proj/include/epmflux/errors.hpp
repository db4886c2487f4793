// Copyright 2026 The epmflux developers
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

namespace epmflux {

/** Base class of every error thrown by the library. */
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonHermitianInput : Error {
  using Error::Error;
};
struct ConvergenceFailure : Error {
  using Error::Error;
};
struct SingularOperand : Error {
  using Error::Error;
};
struct DimensionMismatch : Error {
  using Error::Error;
};
struct NonpositivePartitionFunction : Error {
  using Error::Error;
};
struct SupportViolation : Error {
  using Error::Error;
};
struct IntegrationUnstable : Error {
  using Error::Error;
};
struct CompletePositivityViolation : Error {
  using Error::Error;
};
struct NoUniqueFixedPoint : Error {
  using Error::Error;
};
struct SingularFixedPoint : Error {
  using Error::Error;
};
struct NotAFixedPoint : Error {
  using Error::Error;
};
struct SingularReference : Error {
  using Error::Error;
};
struct MarginalsNotThermal : Error {
  using Error::Error;
};
struct OptimizationNotConverged : Error {
  using Error::Error;
};
struct DecompositionInapplicable : Error {
  using Error::Error;
};
struct LabelMismatch : Error {
  using Error::Error;
};
struct InvalidState : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace epmflux
