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

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "qfictl/operators.hpp"

namespace qfictl {

/// Uniform grid t_i = i T / n, i = 0..n, with t_n == T exactly.
class TimeGrid {
   public:
    TimeGrid(double t_end, std::size_t steps) : t_end_(t_end), steps_(steps) {
        if (!std::isfinite(t_end) || t_end <= 0.0) {
            throw Error(ErrorCode::InvalidConfig, "grid end time must be positive and finite");
        }
        if (steps < 1) {
            throw Error(ErrorCode::InvalidConfig, "grid needs at least one step");
        }
    }

    double t_end() const noexcept {
        return t_end_;
    }
    std::size_t steps() const noexcept {
        return steps_;
    }
    std::size_t size() const noexcept {
        return steps_ + 1;
    }
    double dt() const noexcept {
        return t_end_ / static_cast<double>(steps_);
    }
    double point(std::size_t i) const noexcept {
        return i >= steps_ ? t_end_ : t_end_ * static_cast<double>(i) / static_cast<double>(steps_);
    }
    double midpoint(std::size_t i) const noexcept {
        return 0.5 * (point(i) + point(i + 1));
    }

   private:
    double t_end_;
    std::size_t steps_;
};

using DriveFn = std::function<HermitianOperator(double t)>;

/// Unitaries U(0 -> t_i) at every grid point.
class Propagator {
   public:
    Propagator(TimeGrid grid, std::vector<UnitaryMatrix> unitaries, double max_phase_step)
        : grid_(grid), unitaries_(std::move(unitaries)), max_phase_step_(max_phase_step) {
    }

    const TimeGrid &grid() const noexcept {
        return grid_;
    }
    const UnitaryMatrix &at(std::size_t i) const {
        return unitaries_.at(i);
    }
    const UnitaryMatrix &final() const {
        return unitaries_.back();
    }
    const std::vector<UnitaryMatrix> &unitaries() const noexcept {
        return unitaries_;
    }
    Index dim() const {
        return unitaries_.front().dim();
    }
    /// max_t ||H(t)|| dt over the run; values above 0.01 are coarse for production accuracy.
    double max_phase_step() const noexcept {
        return max_phase_step_;
    }

   private:
    TimeGrid grid_;
    std::vector<UnitaryMatrix> unitaries_;
    double max_phase_step_;
};

inline constexpr double kMaxPhaseStep = 0.1;

/// Midpoint-exponential integrator: U(t_{i+1}) = exp(-i dt H(t_i + dt/2)) U(t_i).
/// Throws StepTooCoarse if ||H|| dt exceeds kMaxPhaseStep anywhere.
inline Propagator propagate(const DriveFn &drive, const TimeGrid &grid) {
    const double dt = grid.dt();
    std::vector<UnitaryMatrix> us;
    us.reserve(grid.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.steps(); ++i) {
        const HermitianOperator h = drive(grid.midpoint(i));
        if (i == 0) {
            us.push_back(UnitaryMatrix::identity_of(h.dim()));
        }
        const double phase = spectral_norm(h) * dt;
        worst = std::max(worst, phase);
        if (phase > kMaxPhaseStep) {
            throw Error(ErrorCode::StepTooCoarse,
                        "||H|| dt = " + std::to_string(phase) + " at t = " + std::to_string(grid.midpoint(i)));
        }
        us.push_back(exp_skew(h, dt) * us.back());
    }
    return Propagator(grid, std::move(us), worst);
}

/// Default resolution n = ceil(100 T max(1, max ||H||)), with ||H|| sampled at `samples` points.
inline std::size_t default_steps(const DriveFn &drive, double t_end, std::size_t samples = 257) {
    double max_norm = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        const double t = t_end * static_cast<double>(i) / static_cast<double>(samples - 1);
        max_norm = std::max(max_norm, spectral_norm(drive(t)));
    }
    return static_cast<std::size_t>(std::ceil(100.0 * t_end * std::max(1.0, max_norm)));
}

/// psi(t_i) = U(0 -> t_i) psi0 for every grid point.
inline std::vector<Vector> evolve_state(const Propagator &p, const Vector &psi0) {
    if (psi0.size() != p.dim()) {
        throw Error(ErrorCode::DimMismatch, "initial state dimension does not match propagator");
    }
    if (std::abs(psi0.norm() - 1.0) > 1e-12) {
        throw Error(ErrorCode::NumericalError, "initial state is not normalized");
    }
    std::vector<Vector> traj;
    traj.reserve(p.unitaries().size());
    for (const auto &u : p.unitaries()) {
        traj.push_back(u.matrix() * psi0);
    }
    return traj;
}

}  // namespace qfictl
