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
#include <functional>
#include <numbers>
#include <span>

#include "qfictl/operators.hpp"

namespace qfictl {

using HamiltonianFn = std::function<HermitianOperator(double g, double t)>;
using EigenFn = std::function<EigenSystem(double g, double t)>;
/// f_values[k] is f_k(t) for the k-th eigenvector of dH/dg in ascending-eigenvalue order.
using CdFn = std::function<HermitianOperator(double g, double t, std::span<const double> f_values)>;

/// A one-parameter family of Hamiltonians H_g(t) together with its parameter derivative.
struct ParametricModel {
    Index dim = 0;
    HamiltonianFn hamiltonian;
    HamiltonianFn d_param_h;
    /// Optional closed-form eigensystem of d_param_h, continuous in t (usable as a transport gauge).
    EigenFn analytic_eigs;
    /// Optional closed-form counterdiabatic-like operator built from the eigenvectors of d_param_h.
    CdFn analytic_cd;
};

enum class Estimand { Frequency, Amplitude };

struct RotatingFieldConfig {
    double B = 1.0;
    double omega = 1.0;
    Estimand estimand = Estimand::Frequency;

    /// The value of the estimated parameter: omega or B.
    double parameter() const noexcept {
        return estimand == Estimand::Frequency ? omega : B;
    }
};

inline void validate(const RotatingFieldConfig &cfg) {
    if (!std::isfinite(cfg.B) || cfg.B <= 0.0) {
        throw Error(ErrorCode::InvalidConfig, "field amplitude B must be positive and finite");
    }
    if (!std::isfinite(cfg.omega)) {
        throw Error(ErrorCode::InvalidConfig, "rotation frequency must be finite");
    }
}

/// Generic model from user callbacks; no differentiation is attempted.
inline ParametricModel make_callback_model(Index dim, HamiltonianFn hamiltonian, HamiltonianFn d_param_h) {
    if (dim < 1 || !hamiltonian || !d_param_h) {
        throw Error(ErrorCode::InvalidConfig, "callback model needs dim >= 1 and both callbacks");
    }
    ParametricModel m;
    m.dim = dim;
    m.hamiltonian = std::move(hamiltonian);
    m.d_param_h = std::move(d_param_h);
    return m;
}

namespace detail {

inline HermitianOperator rotating_field(double amplitude, double angle) {
    return HermitianOperator::hermitize(-amplitude *
                                        (std::cos(angle) * pauli(Pauli::X) + std::sin(angle) * pauli(Pauli::Z)));
}

// Columns (lower, upper) = ((cos a, -sin a), (sin a, cos a)): the eigenvectors of
// -cos(2a) sz + sin(2a) sx with eigenvalues -1, +1. Real, so parallel transport holds automatically.
inline Matrix half_angle_basis(double a) {
    Matrix v(2, 2);
    v << std::cos(a), std::sin(a), -std::sin(a), std::cos(a);
    return v;
}

}  // namespace detail

/// Qubit in a uniformly rotating field, H(t) = -B [cos(wt) sx + sin(wt) sz].
/// The model parameter g is w for Estimand::Frequency and B for Estimand::Amplitude.
inline ParametricModel make_rotating_qubit(const RotatingFieldConfig &cfg) {
    validate(cfg);
    ParametricModel m;
    m.dim = 2;
    const double B = cfg.B;
    const double omega = cfg.omega;

    if (cfg.estimand == Estimand::Frequency) {
        m.hamiltonian = [B](double w, double t) { return detail::rotating_field(B, w * t); };
        m.d_param_h = [B](double w, double t) {
            const double th = w * t;
            return HermitianOperator::hermitize(t * B *
                                                (std::sin(th) * pauli(Pauli::X) - std::cos(th) * pauli(Pauli::Z)));
        };
        // Eigenvalues +-tB. At t = 0 the operator vanishes and the t -> 0+ limit of the basis is used.
        m.analytic_eigs = [B](double w, double t) {
            EigenSystem es;
            es.gauge = GaugePolicy::ParallelTransport;
            es.vectors = detail::half_angle_basis(0.5 * w * t);
            es.values.resize(2);
            es.values << -std::abs(t) * B, std::abs(t) * B;
            if (t < 0.0) {
                es.vectors.col(0).swap(es.vectors.col(1));
            }
            return es;
        };
        m.analytic_cd = [](double w, double t, std::span<const double> f) {
            Matrix h = -0.5 * w * pauli(Pauli::Y);
            if (!f.empty()) {
                if (f.size() != 2) {
                    throw Error(ErrorCode::DimMismatch, "qubit model needs two phase rates");
                }
                const Matrix v = detail::half_angle_basis(0.5 * w * t);
                h += f[0] * v.col(0) * v.col(0).adjoint() + f[1] * v.col(1) * v.col(1).adjoint();
            }
            return HermitianOperator::hermitize(h);
        };
    } else {
        m.hamiltonian = [omega](double b, double t) { return detail::rotating_field(b, omega * t); };
        m.d_param_h = [omega](double, double t) { return detail::rotating_field(1.0, omega * t); };
        m.analytic_eigs = [omega](double, double t) {
            EigenSystem es;
            es.gauge = GaugePolicy::ParallelTransport;
            es.vectors = detail::half_angle_basis(0.5 * omega * t - 0.25 * std::numbers::pi);
            es.values.resize(2);
            es.values << -1.0, 1.0;
            return es;
        };
    }
    return m;
}

/// Closed-form counterdiabatic-like operator -(w/2) sy for the frequency model with f_k = 0.
inline HermitianOperator analytic_cd_qubit(const RotatingFieldConfig &cfg, bool f_zero = true) {
    validate(cfg);
    if (cfg.estimand != Estimand::Frequency) {
        throw Error(ErrorCode::NotImplementedForEstimand,
                    "closed-form control is only available for frequency estimation");
    }
    if (!f_zero) {
        throw Error(ErrorCode::InvalidConfig, "closed form assumes vanishing phase rates f_k");
    }
    return HermitianOperator::hermitize(-0.5 * cfg.omega * pauli(Pauli::Y));
}

}  // namespace qfictl
