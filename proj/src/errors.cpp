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

#include "ergorisk/errors.hpp"

#include <utility>

namespace ergorisk {

std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kShape: return "ShapeError";
    case ErrorCode::kUnstableMatrix: return "UnstableMatrix";
    case ErrorCode::kNotStabilizable: return "NotStabilizable";
    case ErrorCode::kNotControllable: return "NotControllable";
    case ErrorCode::kRiskMomentUnavailable: return "RiskMomentUnavailable";
    case ErrorCode::kWrongNoiseModel: return "WrongNoiseModel";
    case ErrorCode::kRcNotZero: return "RcNotZero";
    case ErrorCode::kDivergedRollout: return "DivergedRollout";
    case ErrorCode::kStabilityLost: return "StabilityLost";
    case ErrorCode::kNoConvergence: return "NoConvergence";
    case ErrorCode::kGeneratorExhausted: return "GeneratorExhausted";
    case ErrorCode::kEigenFailure: return "EigenFailure";
    case ErrorCode::kNumerical: return "NumericalError";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kConfig: return "ConfigError";
    case ErrorCode::kIo: return "IoError";
  }
  return "Error";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(error_name(code)) + ": " + what),
      code_(code) {}

DivergedRollout::DivergedRollout(long truncation_time, const std::string& what)
    : Error(ErrorCode::kDivergedRollout, what),
      truncation_time_(truncation_time) {}

StabilityLost::StabilityLost(Eigen::MatrixXd last_safe_gain,
                             const std::string& what)
    : Error(ErrorCode::kStabilityLost, what),
      last_safe_gain_(std::move(last_safe_gain)) {}

}  // namespace ergorisk
