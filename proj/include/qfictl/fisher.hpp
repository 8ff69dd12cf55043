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

// Generator h_g(T) and the three Fisher quantities: maximal for a given state (4 Var h_g),
// optimal over states ((tau_max - tau_min)^2), and the upper bound from the spectral gap of dH/dg.

#include <cmath>
#include <functional>

#include "qfictl/models.hpp"
#include "qfictl/propagation.hpp"

namespace qfictl {

using ParamDriveFn = std::function<HermitianOperator(double g, double t)>;

enum class GeneratorMethod { IntegralForm, DerivativeForm };

/// h_g(T) = int_0^T U^dagger(0->t) dH_g/dg(t) U(0->t) dt with U from an existing propagator
/// (trapezoid rule on the propagator's grid).
inline HermitianOperator generator_integral(const ParametricModel &model, double g, const Propagator &prop) {
    const TimeGrid &grid = prop.grid();
    const double dt = grid.dt();
    Matrix acc = Matrix::Zero(prop.dim(), prop.dim());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Matrix &u = prop.at(i).matrix();
        const double w = (i == 0 || i == grid.steps()) ? 0.5 * dt : dt;
        acc += w * (u.adjoint() * model.d_param_h(g, grid.point(i)).matrix() * u);
    }
    return HermitianOperator::hermitize(acc);
}

/// Same, propagating `drive` (H_g itself or a controlled total Hamiltonian) on `grid` first.
inline HermitianOperator generator_integral(const ParametricModel &model, double g, const DriveFn &drive,
                                            const TimeGrid &grid) {
    return generator_integral(model, g, propagate(drive, grid));
}

struct FiniteDifferenceGenerator {
    HermitianOperator generator;
    /// ||(A - A^dagger)/2||_F of the raw difference quotient before symmetrisation.
    double anti_hermitian_residual = 0.0;
};

inline double default_fd_step(double g) {
    return 1e-5 * std::max(1.0, std::abs(g));
}

/// Builds the drive H(t) for one parameter value; lets expensive per-g setup happen once.
using DriveFactory = std::function<DriveFn(double g)>;

/// h_g(T) = i U^dagger(g) dU/dg by a central difference of the final propagators at g +- eps.
inline FiniteDifferenceGenerator generator_derivative_factory(const DriveFactory &factory, double g,
                                                              const TimeGrid &grid, double eps = 0.0) {
    if (eps <= 0.0) {
        eps = default_fd_step(g);
    }
    auto final_unitary = [&](double gv) { return propagate(factory(gv), grid).final().matrix(); };
    const Matrix u0 = final_unitary(g);
    const Matrix up = final_unitary(g + eps);
    const Matrix um = final_unitary(g - eps);
    const Matrix raw = kI * u0.adjoint() * (up - um) / (2.0 * eps);
    return {HermitianOperator::hermitize(raw), 0.5 * (raw - raw.adjoint()).norm()};
}

inline FiniteDifferenceGenerator generator_derivative(const ParamDriveFn &drive, double g, const TimeGrid &grid,
                                                      double eps = 0.0) {
    return generator_derivative_factory(
        [&drive](double gv) -> DriveFn { return [&drive, gv](double t) { return drive(gv, t); }; }, g, grid, eps);
}

inline FiniteDifferenceGenerator generator_derivative(const ParametricModel &model, double g, const TimeGrid &grid,
                                                      double eps = 0.0) {
    return generator_derivative(model.hamiltonian, g, grid, eps);
}

/// 4 (<h^2> - <h>^2) in the state psi0.
inline double maximal_qfi(const HermitianOperator &h, const Vector &psi0) {
    if (psi0.size() != h.dim()) {
        throw Error(ErrorCode::DimMismatch, "state dimension does not match generator");
    }
    if (std::abs(psi0.norm() - 1.0) > 1e-12) {
        throw Error(ErrorCode::NumericalError, "state is not normalized");
    }
    const Vector hpsi = h.matrix() * psi0;
    const double mean = psi0.dot(hpsi).real();
    const double second = hpsi.squaredNorm();
    return 4.0 * (second - mean * mean);
}

struct OptimalQfi {
    double value = 0.0;
    double tau_max = 0.0;
    double tau_min = 0.0;
    /// Equal superposition of the extreme eigenvectors of h.
    Vector state;
};

inline OptimalQfi optimal_qfi(const HermitianOperator &h) {
    const EigenSystem es = eig_hermitian(h);
    const Index n = es.dim();
    OptimalQfi r;
    r.tau_min = es.values(0);
    r.tau_max = es.values(n - 1);
    r.value = (r.tau_max - r.tau_min) * (r.tau_max - r.tau_min);
    r.state = (es.vectors.col(n - 1) + es.vectors.col(0)) / std::sqrt(2.0);
    if (n == 1) {
        r.state = es.vectors.col(0);
    }
    return r;
}

/// int_0^T (mu_max(t) - mu_min(t)) dt over the eigenvalues of dH/dg, trapezoid rule.
inline double gap_integral(const ParametricModel &model, double g, const TimeGrid &grid) {
    const double dt = grid.dt();
    double acc = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const EigenSystem es = eig_hermitian(model.d_param_h(g, grid.point(i)));
        const double gap = es.values(es.dim() - 1) - es.values(0);
        acc += ((i == 0 || i == grid.steps()) ? 0.5 * dt : dt) * gap;
    }
    return acc;
}

inline double upper_bound_qfi(const ParametricModel &model, double g, const TimeGrid &grid) {
    const double gap = gap_integral(model, g, grid);
    return gap * gap;
}

struct GeneratorReport {
    HermitianOperator h_g;
    double tau_max = 0.0;
    double tau_min = 0.0;
    double optimal_qfi = 0.0;
    double upper_bound_qfi = 0.0;
    GeneratorMethod method = GeneratorMethod::IntegralForm;
    Vector optimal_state;
};

inline GeneratorReport make_report(const HermitianOperator &h, double upper_bound, GeneratorMethod method) {
    const OptimalQfi opt = optimal_qfi(h);
    return GeneratorReport{h, opt.tau_max, opt.tau_min, opt.value, upper_bound, method, opt.state};
}

}  // namespace qfictl
