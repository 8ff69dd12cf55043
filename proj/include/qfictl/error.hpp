// Copyright 2026 The qfictl Authors
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
#include <string_view>

namespace qfictl {

enum class ErrorCode {
    InvalidMatrix,
    InvalidConfig,
    NotImplementedForEstimand,
    StepTooCoarse,
    DimMismatch,
    DegenerateDerivativeSpectrum,
    GaugeError,
    FitError,
    InvalidFrequency,
    BasisError,
    NumericalError,
    AmbiguousPhase,
    StatisticsError,
};

constexpr std::string_view error_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidMatrix: return "InvalidMatrix";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::NotImplementedForEstimand: return "NotImplementedForEstimand";
        case ErrorCode::StepTooCoarse: return "StepTooCoarse";
        case ErrorCode::DimMismatch: return "DimMismatch";
        case ErrorCode::DegenerateDerivativeSpectrum: return "DegenerateDerivativeSpectrum";
        case ErrorCode::GaugeError: return "GaugeError";
        case ErrorCode::FitError: return "FitError";
        case ErrorCode::InvalidFrequency: return "InvalidFrequency";
        case ErrorCode::BasisError: return "BasisError";
        case ErrorCode::NumericalError: return "NumericalError";
        case ErrorCode::AmbiguousPhase: return "AmbiguousPhase";
        case ErrorCode::StatisticsError: return "StatisticsError";
    }
    return "Unknown";
}

/// Every numerical failure in the library is reported through this type; `code()` names the
/// originating condition so that callers (the CLI in particular) can report it verbatim.
class Error : public std::runtime_error {
   public:
    Error(ErrorCode code, const std::string &what)
        : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {
    }

    ErrorCode code() const noexcept {
        return code_;
    }
    std::string_view name() const noexcept {
        return error_name(code_);
    }

   private:
    ErrorCode code_;
};

}  // namespace qfictl
