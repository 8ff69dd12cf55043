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

// Physical frame changes G(t): the driven state psi' = G^dagger psi obeys
// H'(t) = G^dagger (H - K) G with K = i dG/dt G^dagger. For g-independent G the generator h_g(T)
// and hence every Fisher quantity is unchanged.

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <vector>

#include "qfictl/control.hpp"
#include "qfictl/fisher.hpp"
#include "qfictl/propagation.hpp"

namespace qfictl {

struct FrameTransform {
    std::function<UnitaryMatrix(double t)> G;
    DriveFn K;
    /// Set when G(t) = exp(-i alpha(t) sigma_axis).
    std::function<double(double t)> alpha;
    std::optional<Pauli> axis;
};

inline FrameTransform identity_frame(Index dim) {
    FrameTransform f;
    f.G = [dim](double) { return UnitaryMatrix::identity_of(dim); };
    f.K = [dim](double) { return HermitianOperator::zero(dim); };
    return f;
}

/// G(t) = exp(-i rate t sigma_axis); K = rate sigma_axis exactly.
inline FrameTransform pauli_frame_linear(Pauli axis, double rate) {
    const HermitianOperator sigma(pauli(axis));
    FrameTransform f;
    f.axis = axis;
    f.alpha = [rate](double t) { return rate * t; };
    f.G = [sigma, rate](double t) { return exp_skew(sigma, rate * t); };
    f.K = [sigma, rate](double) { return rate * sigma; };
    return f;
}

/// Any differentiable G(t); K from a central difference of G with step h.
inline FrameTransform general_frame(std::function<UnitaryMatrix(double t)> g_of_t, double h = 1e-5) {
    FrameTransform f;
    f.G = g_of_t;
    f.K = [g_of_t, h](double t) {
        const Matrix dg = (g_of_t(t + h).matrix() - g_of_t(t - h).matrix()) / (2.0 * h);
        const Matrix k = kI * dg * g_of_t(t).matrix().adjoint();
        if (0.5 * (k - k.adjoint()).norm() > 1e-8) {
            throw Error(ErrorCode::NumericalError, "numerical K(t) is not Hermitian");
        }
        return HermitianOperator::hermitize(k);
    };
    return f;
}

/// G(t) = exp(-i alpha(t) sigma_axis) for a generic alpha(t).
inline FrameTransform pauli_frame(Pauli axis, std::function<double(double t)> alpha, double h = 1e-5) {
    const HermitianOperator sigma(pauli(axis));
    FrameTransform f = general_frame([sigma, alpha](double t) { return exp_skew(sigma, alpha(t)); }, h);
    f.axis = axis;
    f.alpha = std::move(alpha);
    return f;
}

struct BoundaryCheck {
    double initial_error = 0.0;  ///< ||G(0) - I||_F
    double final_error = 0.0;    ///< ||G(T) - I||_F
    bool ok = false;
};

inline BoundaryCheck check_boundaries(const FrameTransform &f, double t_end) {
    BoundaryCheck b;
    const Matrix g0 = f.G(0.0).matrix();
    const Matrix gt = f.G(t_end).matrix();
    b.initial_error = (g0 - identity(g0.rows())).norm();
    b.final_error = (gt - identity(gt.rows())).norm();
    b.ok = b.initial_error <= 1e-10 && b.final_error <= 1e-6;
    return b;
}

inline HermitianOperator transform_operator(const HermitianOperator &h, const FrameTransform &f, double t) {
    const Matrix g = f.G(t).matrix();
    return HermitianOperator::hermitize(g.adjoint() * (h - f.K(t)).matrix() * g);
}

/// H'(t) = G^dagger(t) [H(t) - K(t)] G(t).
inline DriveFn transform_hamiltonian(DriveFn h, FrameTransform f) {
    return [h = std::move(h), f = std::move(f)](double t) { return transform_operator(h(t), f, t); };
}

inline ParamDriveFn transform_param_drive(ParamDriveFn h, FrameTransform f) {
    return [h = std::move(h), f = std::move(f)](double g, double t) { return transform_operator(h(g, t), f, t); };
}

/// T = 4 pi n / |omega_c|, where exp(i omega_c T sigma / 2) returns to the identity.
inline double boundary_times(double omega_c, int n) {
    if (omega_c == 0.0 || !std::isfinite(omega_c)) {
        throw Error(ErrorCode::InvalidFrequency, "boundary times need a nonzero finite omega_c");
    }
    if (n < 1) {
        throw Error(ErrorCode::InvalidConfig, "boundary index n must be >= 1");
    }
    return 4.0 * std::numbers::pi * n / std::abs(omega_c);
}

struct FisherInvarianceReport {
    HermitianOperator h;
    HermitianOperator h_prime;
    double h_diff_norm = 0.0;          ///< ||h' - h||_F
    double h_rel_diff = 0.0;           ///< ||h' - h||_F / max(1, ||h||_F)
    double h_squared_rel_diff = 0.0;   ///< same for h^2
    double optimal_qfi = 0.0;
    double optimal_qfi_prime = 0.0;
    double optimal_rel_diff = 0.0;
    double maximal_qfi = 0.0;          ///< for the optimal state of h
    double maximal_qfi_prime = 0.0;    ///< same state, transformed generator
    double maximal_rel_diff = 0.0;
    double upper_bound = 0.0;
    double upper_bound_prime = 0.0;
    double upper_bound_rel_diff = 0.0;
};

namespace detail {
inline double rel_diff(double a, double b) {
    return std::abs(a - b) / std::max(1e-300, std::max(std::abs(a), std::abs(b)));
}
}  // namespace detail

/// Compares h_g(T) (derivative form) for `drive` and for its image under the g-independent frame f.
/// The upper bound of the transformed family uses dH'/dg = G^dagger dH/dg G.
inline FisherInvarianceReport fisher_invariance_check(const ParametricModel &model, double g, const ParamDriveFn &drive,
                                                      const FrameTransform &f, const TimeGrid &grid) {
    const ParamDriveFn drive_prime = transform_param_drive(drive, f);
    const HermitianOperator h = generator_derivative(drive, g, grid).generator;
    const HermitianOperator hp = generator_derivative(drive_prime, g, grid).generator;

    ParametricModel transformed = model;
    transformed.hamiltonian = transform_param_drive(model.hamiltonian, f);
    transformed.d_param_h = [d = model.d_param_h, f](double gv, double t) {
        const Matrix gt = f.G(t).matrix();
        return HermitianOperator::hermitize(gt.adjoint() * d(gv, t).matrix() * gt);
    };
    transformed.analytic_eigs = nullptr;
    transformed.analytic_cd = nullptr;

    FisherInvarianceReport r{h, hp};
    const double scale = std::max(1.0, h.matrix().norm());
    r.h_diff_norm = (hp.matrix() - h.matrix()).norm();
    r.h_rel_diff = r.h_diff_norm / scale;
    const Matrix h2 = h.matrix() * h.matrix();
    r.h_squared_rel_diff = (hp.matrix() * hp.matrix() - h2).norm() / std::max(1.0, h2.norm());
    const OptimalQfi opt = optimal_qfi(h);
    r.optimal_qfi = opt.value;
    r.optimal_qfi_prime = optimal_qfi(hp).value;
    r.optimal_rel_diff = detail::rel_diff(r.optimal_qfi, r.optimal_qfi_prime);
    r.maximal_qfi = maximal_qfi(h, opt.state);
    r.maximal_qfi_prime = maximal_qfi(hp, opt.state);
    r.maximal_rel_diff = detail::rel_diff(r.maximal_qfi, r.maximal_qfi_prime);
    r.upper_bound = upper_bound_qfi(model, g, grid);
    r.upper_bound_prime = upper_bound_qfi(transformed, g, grid);
    r.upper_bound_rel_diff = detail::rel_diff(r.upper_bound, r.upper_bound_prime);
    return r;
}

struct AppendixAParams {
    double B = 1.0;
    double omega = 1.0;          ///< true rotation frequency
    double omega_c = 1.0;        ///< control frequency for the physical transform
    double formal_t_end = 2.0;   ///< duration for the formal interaction-picture comparison
    int boundary_index = 1;      ///< physical comparison runs to T = 4 pi n / omega_c
    std::size_t formal_steps = 200000;
    std::size_t physical_steps = 20000;
};

struct AppendixAReport {
    /// (a) formal picture: max over grid of |populations under H_w(t)| - |populations of A(t) psi_S(t)|.
    double formal_population_diff = 0.0;
    double formal_state_diff = 0.0;
    /// (b) physical transform: max_t 1 - |<psi(t)|psi'(t)>|^2 and ||psi(T) - psi'(T)||.
    double physical_max_interior_deficit = 0.0;
    double physical_endpoint_diff = 0.0;
    double physical_t_end = 0.0;
    double optimal_qfi = 0.0;
    double optimal_qfi_prime = 0.0;
    std::vector<double> times;
    std::vector<double> deficits;
};

/// (a) H_w(t) = -B[cos(wt) sx + sin(wt) sz] is only a representation of the static -B sx + w sy / 2
/// under psi_IP = exp(i w t sy / 2) psi_S: same populations. (b) The frame exp(i w_c t sy / 2)
/// applied to the controlled drive yields a different physical evolution that still coincides
/// at boundary times and carries the same Fisher information.
inline AppendixAReport appendix_a_distinction(const AppendixAParams &p) {
    AppendixAReport rep;
    const ParametricModel model = make_rotating_qubit({p.B, p.omega, Estimand::Frequency});
    const HermitianOperator sy(pauli(Pauli::Y));

    {
        const TimeGrid grid(p.formal_t_end, p.formal_steps);
        const HermitianOperator h_static =
            HermitianOperator::hermitize(-p.B * pauli(Pauli::X) + 0.5 * p.omega * pauli(Pauli::Y));
        Vector psi0 = Vector::Zero(2);
        psi0(0) = 1.0;
        const auto traj = evolve_state(propagate([&](double t) { return model.hamiltonian(p.omega, t); }, grid), psi0);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double t = grid.point(i);
            const Vector mapped = exp_skew(sy, -0.5 * p.omega * t).matrix() * (exp_skew(h_static, t).matrix() * psi0);
            for (Index k = 0; k < 2; ++k) {
                rep.formal_population_diff = std::max(rep.formal_population_diff,
                                                      std::abs(std::norm(traj[i](k)) - std::norm(mapped(k))));
            }
            rep.formal_state_diff = std::max(rep.formal_state_diff, (traj[i] - mapped).norm());
        }
    }

    {
        const double t_end = boundary_times(p.omega_c, p.boundary_index);
        rep.physical_t_end = t_end;
        const TimeGrid grid(t_end, p.physical_steps);
        const ControlledDrive drive = make_controlled_drive(model, {p.omega_c, {}}, grid);
        const FrameTransform frame = pauli_frame_linear(Pauli::Y, -0.5 * p.omega_c);
        const DriveFn h = drive.at(p.omega);
        const DriveFn h_prime = transform_hamiltonian(h, frame);
        const EigenSystem &start = drive.basis().at(0);
        const Vector psi0 = (start.vectors.col(1) + start.vectors.col(0)) / std::sqrt(2.0);
        const auto traj = evolve_state(propagate(h, grid), psi0);
        const auto traj_prime = evolve_state(propagate(h_prime, grid), psi0);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double deficit = 1.0 - std::norm(traj[i].dot(traj_prime[i]));
            rep.times.push_back(grid.point(i));
            rep.deficits.push_back(deficit);
            if (i != 0 && i != grid.steps()) {
                rep.physical_max_interior_deficit = std::max(rep.physical_max_interior_deficit, deficit);
            }
        }
        rep.physical_endpoint_diff = (traj.back() - traj_prime.back()).norm();
        const FisherInvarianceReport inv =
            fisher_invariance_check(model, p.omega, drive.as_param_drive(), frame, grid);
        rep.optimal_qfi = inv.optimal_qfi;
        rep.optimal_qfi_prime = inv.optimal_qfi_prime;
    }
    return rep;
}

}  // namespace qfictl
