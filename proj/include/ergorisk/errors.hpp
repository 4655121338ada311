// Copyright 2026 The ErgoRisk Authors
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
#include <string_view>

#include <Eigen/Dense>

namespace ergorisk {

enum class ErrorCode {
  kShape,
  kUnstableMatrix,
  kNotStabilizable,
  kNotControllable,
  kRiskMomentUnavailable,
  kWrongNoiseModel,
  kRcNotZero,
  kDivergedRollout,
  kStabilityLost,
  kNoConvergence,
  kGeneratorExhausted,
  kEigenFailure,
  kNumerical,
  kInvalidArgument,
  kConfig,
  kIo,
};

// Stable identifier for an error code, e.g. "UnstableMatrix".
std::string_view error_name(ErrorCode code);

// Base class of every error raised by the library. The message is prefixed
// with the error name so that it can be surfaced to users verbatim.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// A rollout whose state norm exceeded the overflow guard.
class DivergedRollout : public Error {
 public:
  DivergedRollout(long truncation_time, const std::string& what);

  // Index of the first state that exceeded the guard.
  long truncation_time() const noexcept { return truncation_time_; }

 private:
  long truncation_time_;
};

// An inner-solver iterate left the stabilizing set.
class StabilityLost : public Error {
 public:
  StabilityLost(Eigen::MatrixXd last_safe_gain, const std::string& what);

  const Eigen::MatrixXd& last_safe_gain() const noexcept {
    return last_safe_gain_;
  }

 private:
  Eigen::MatrixXd last_safe_gain_;
};

}  // namespace ergorisk
