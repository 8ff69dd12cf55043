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

// Counterdiabatic-like control that drives the eigenvectors of dH/dg:
//   H_cd(t) = sum_k f_k(t) |psi_k><psi_k| + i sum_k |d_t psi_k><psi_k|
// in the parallel-transport gauge, and the total Hamiltonian H_g - H_{g_c} + H_cd|_{g_c}.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "qfictl/fisher.hpp"
#include "qfictl/fit.hpp"
#include "qfictl/models.hpp"
#include "qfictl/propagation.hpp"

namespace qfictl {

using PhaseRateFn = std::function<double(double t)>;

struct ControlConfig {
    double g_c = 0.0;
    /// One rate per eigenvector branch (ascending order at the start); empty means all zero.
    std::vector<PhaseRateFn> f_k;
};

inline constexpr double kDegenerateGap = 1e-8;

namespace detail {

inline double min_gap(const EigenSystem &es) {
    double gap = INFINITY;
    for (Index k = 0; k + 1 < es.dim(); ++k) {
        gap = std::min(gap, std::abs(es.values(k + 1) - es.values(k)));
    }
    return gap;
}

inline std::vector<double> rates_at(const std::vector<PhaseRateFn> &f_k, Index dim, double t) {
    std::vector<double> out(static_cast<size_t>(dim), 0.0);
    if (!f_k.empty()) {
        if (static_cast<Index>(f_k.size()) != dim) {
            throw Error(ErrorCode::DimMismatch, "need one phase rate per level");
        }
        for (size_t k = 0; k < f_k.size(); ++k) {
            out[k] = f_k[k] ? f_k[k](t) : 0.0;
            if (!std::isfinite(out[k])) {
                throw Error(ErrorCode::InvalidConfig, "phase rate is not finite");
            }
        }
    }
    return out;
}

}  // namespace detail

/// Eigenvectors of dH/dg at g = g_c on a grid, branch-matched by overlap and parallel transported.
class TrackedBasis {
   public:
    TrackedBasis(const ParametricModel &model, double g_c, const TimeGrid &grid, const std::vector<PhaseRateFn> &f_k)
        : grid_(grid), g_c_(g_c), d_param_h_(model.d_param_h), analytic_eigs_(model.analytic_eigs) {
        const std::size_t n = grid.size();
        std::vector<std::optional<EigenSystem>> raw(n);
        std::vector<bool> degenerate(n, false);
        std::size_t interior_degenerate = 0;
        for (std::size_t i = 0; i < n; ++i) {
            EigenSystem es = eig_hermitian(d_param_h_(g_c, grid.point(i)));
            degenerate[i] = detail::min_gap(es) < kDegenerateGap;
            if (degenerate[i] && i != 0 && i + 1 != n) {
                ++interior_degenerate;
            }
            raw[i] = std::move(es);
        }
        if (static_cast<double>(interior_degenerate) > 0.01 * static_cast<double>(n)) {
            throw Error(ErrorCode::DegenerateDerivativeSpectrum,
                        "dH/dg is degenerate on more than 1% of the grid");
        }

        samples_.resize(n);
        std::size_t start = 0;
        if (degenerate[0] && analytic_eigs_) {
            samples_[0] = analytic_eigs_(g_c, grid.point(0));
            samples_[0].gauge = GaugePolicy::ParallelTransport;
        } else {
            while (start < n && degenerate[start]) {
                ++start;
            }
            if (start == n) {
                throw Error(ErrorCode::DegenerateDerivativeSpectrum, "dH/dg is degenerate everywhere");
            }
            samples_[start] = *raw[start];
            samples_[start].gauge = GaugePolicy::ParallelTransport;
            // Limit basis for leading degenerate points.
            for (std::size_t i = 0; i < start; ++i) {
                samples_[i] = with_values(samples_[start], grid.point(i));
            }
        }
        for (std::size_t i = start + 1; i < n; ++i) {
            samples_[i] = degenerate[i] ? with_values(samples_[i - 1], grid.point(i))
                                        : align_to_reference(*raw[i], samples_[i - 1].vectors);
        }

        const Index dim = samples_[0].dim();
        phases_.assign(n, std::vector<double>(static_cast<size_t>(dim), 0.0));
        if (!f_k.empty()) {
            std::vector<double> prev = detail::rates_at(f_k, dim, grid.point(0));
            for (std::size_t i = 1; i < n; ++i) {
                const std::vector<double> cur = detail::rates_at(f_k, dim, grid.point(i));
                for (size_t k = 0; k < cur.size(); ++k) {
                    phases_[i][k] = phases_[i - 1][k] + 0.5 * grid.dt() * (prev[k] + cur[k]);
                }
                prev = cur;
            }
        }
    }

    const TimeGrid &grid() const noexcept {
        return grid_;
    }
    double g_c() const noexcept {
        return g_c_;
    }
    Index dim() const {
        return samples_.front().dim();
    }
    const EigenSystem &at(std::size_t i) const {
        return samples_.at(i);
    }
    /// theta_k(t_i) = int_0^{t_i} f_k.
    double phase(Index branch, std::size_t i) const {
        return phases_.at(i).at(static_cast<size_t>(branch));
    }
    /// Branch labels follow the ascending order at the first nondegenerate point.
    Index max_branch() const {
        return dim() - 1;
    }
    Index min_branch() const {
        return 0;
    }

    std::size_t nearest_index(double t) const {
        const double x = std::round(t / grid_.dt());
        return static_cast<std::size_t>(std::clamp(x, 0.0, static_cast<double>(grid_.steps())));
    }

    /// Eigensystem at an arbitrary t, aligned to the nearest tracked sample. Degenerate points
    /// fall back to the analytic limit basis when the model has one, else to the sample itself.
    EigenSystem evaluate(double t, bool *degenerate = nullptr) const {
        const EigenSystem &ref = samples_[nearest_index(t)];
        const HermitianOperator a = d_param_h_(g_c_, t);
        EigenSystem es = eig_hermitian(a);
        const bool degen = detail::min_gap(es) < kDegenerateGap;
        if (degenerate) {
            *degenerate = degen;
        }
        if (!degen) {
            return align_to_reference(es, ref.vectors);
        }
        if (analytic_eigs_) {
            return align_to_reference(analytic_eigs_(g_c_, t), ref.vectors);
        }
        return with_values(ref, t);
    }

   private:
    EigenSystem with_values(const EigenSystem &basis, double t) const {
        EigenSystem out = basis;
        const Matrix a = d_param_h_(g_c_, t).matrix();
        for (Index k = 0; k < out.dim(); ++k) {
            out.values(k) = out.vectors.col(k).dot(a * out.vectors.col(k)).real();
        }
        return out;
    }

    TimeGrid grid_;
    double g_c_;
    HamiltonianFn d_param_h_;
    EigenFn analytic_eigs_;
    std::vector<EigenSystem> samples_;
    std::vector<std::vector<double>> phases_;
};

inline TrackedBasis track_eigenbasis(const ParametricModel &model, double g_c, const TimeGrid &grid,
                                     const std::vector<PhaseRateFn> &f_k = {}) {
    return TrackedBasis(model, g_c, grid, f_k);
}

inline constexpr double kGaugeTolerance = 1e-6;

/// H_cd(t) evaluated at any t in [0, T]. d_t psi_k comes from second-order finite differences of
/// locally parallel-transported eigenvectors (central inside, one-sided near the ends).
class CdHamiltonian {
   public:
    /// `analytic_limit`: the model supplies a closed-form basis for degenerate points.
    CdHamiltonian(std::shared_ptr<const TrackedBasis> basis, std::vector<PhaseRateFn> f_k, bool analytic_limit)
        : basis_(std::move(basis)), f_k_(std::move(f_k)), analytic_(analytic_limit) {
        const TimeGrid &g = basis_->grid();
        step_ = std::min(g.dt(), 1e-3 * g.t_end());
    }

    HermitianOperator operator()(double t) const {
        const TimeGrid &g = basis_->grid();
        const double t_end = g.t_end();
        bool degen = false;
        EigenSystem center = basis_->evaluate(t, &degen);
        if (degen && !analytic_) {
            // No limit basis available: use the neighbouring nondegenerate point.
            return (*this)(std::min(t + step_, t_end));
        }
        const double h = step_;
        const Index n = center.dim();
        Matrix deriv(n, n);
        auto next = [&](double s, const Matrix &ref) { return align_to_reference(basis_->evaluate(s), ref).vectors; };
        // Fourth-order stencils; one-sided within 2h of either end.
        if (t - 2.0 * h >= 0.0 && t + 2.0 * h <= t_end) {
            const Matrix p1 = next(t + h, center.vectors);
            const Matrix p2 = next(t + 2.0 * h, p1);
            const Matrix m1 = next(t - h, center.vectors);
            const Matrix m2 = next(t - 2.0 * h, m1);
            deriv = (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h);
        } else {
            const double s = (t - 2.0 * h < 0.0) ? h : -h;
            Matrix v[5];
            v[0] = center.vectors;
            for (int k = 1; k < 5; ++k) {
                v[k] = next(t + k * s, v[k - 1]);
            }
            deriv = (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]) / (12.0 * s);
        }

        Matrix h_cd = kI * deriv * center.vectors.adjoint();
        const std::vector<double> rates = detail::rates_at(f_k_, n, t);
        for (Index k = 0; k < n; ++k) {
            h_cd += rates[static_cast<size_t>(k)] * center.vectors.col(k) * center.vectors.col(k).adjoint();
        }
        const double resid = 0.5 * (h_cd - h_cd.adjoint()).norm();
        if (resid > kGaugeTolerance) {
            throw Error(ErrorCode::GaugeError, "transport term is not Hermitian (residual " + std::to_string(resid) +
                                                   " at t = " + std::to_string(t) + ")");
        }
        return HermitianOperator::hermitize(h_cd);
    }

    const TrackedBasis &basis() const noexcept {
        return *basis_;
    }
    const std::vector<PhaseRateFn> &rates() const noexcept {
        return f_k_;
    }
    double difference_step() const noexcept {
        return step_;
    }

   private:
    std::shared_ptr<const TrackedBasis> basis_;
    std::vector<PhaseRateFn> f_k_;
    double step_ = 0.0;
    bool analytic_ = false;
};

inline CdHamiltonian synthesize_cd(const ParametricModel &model, const TrackedBasis &basis,
                                   std::vector<PhaseRateFn> f_k = {}) {
    return CdHamiltonian(std::make_shared<const TrackedBasis>(basis), std::move(f_k),
                         static_cast<bool>(model.analytic_eigs));
}

/// H_tot(g, t) = H_g(t) - H_{g_c}(t) + H_cd(t)|_{g_c}. Its g-derivative is exactly dH_g/dg.
class ControlledDrive {
   public:
    ControlledDrive(const ParametricModel &model, const ControlConfig &cfg, const TimeGrid &grid)
        : hamiltonian_(model.hamiltonian), g_c_(cfg.g_c) {
        auto basis = std::make_shared<const TrackedBasis>(model, cfg.g_c, grid, cfg.f_k);
        cd_ = std::make_shared<const CdHamiltonian>(std::move(basis), cfg.f_k,
                                                    static_cast<bool>(model.analytic_eigs));
    }

    HermitianOperator operator()(double g, double t) const {
        if (g == g_c_) {
            return (*cd_)(t);
        }
        return hamiltonian_(g, t) - hamiltonian_(g_c_, t) + (*cd_)(t);
    }

    DriveFn at(double g) const {
        return [self = *this, g](double t) { return self(g, t); };
    }
    ParamDriveFn as_param_drive() const {
        return [self = *this](double g, double t) { return self(g, t); };
    }

    double g_c() const noexcept {
        return g_c_;
    }
    const CdHamiltonian &cd() const noexcept {
        return *cd_;
    }
    const TrackedBasis &basis() const noexcept {
        return cd_->basis();
    }

   private:
    HamiltonianFn hamiltonian_;
    double g_c_;
    std::shared_ptr<const CdHamiltonian> cd_;
};

inline ControlledDrive make_controlled_drive(const ParametricModel &model, const ControlConfig &cfg,
                                             const TimeGrid &grid) {
    return ControlledDrive(model, cfg, grid);
}

inline DriveFn total_hamiltonian(const ParametricModel &model, double g, const ControlConfig &cfg,
                                 const TimeGrid &grid) {
    return ControlledDrive(model, cfg, grid).at(g);
}

/// The uncorrected construction H_tot = H_cd(g): control synthesized at the parameter value itself,
/// so the generator follows dH_cd/dg rather than dH_g/dg.
inline DriveFactory naive_cd_drive(const ParametricModel &model, const TimeGrid &grid,
                                   std::vector<PhaseRateFn> f_k = {}) {
    return [model, grid, f_k](double g) -> DriveFn {
        auto cd = std::make_shared<const CdHamiltonian>(std::make_shared<const TrackedBasis>(model, g, grid, f_k), f_k,
                                                        static_cast<bool>(model.analytic_eigs));
        return [cd](double t) { return (*cd)(t); };
    };
}

struct GeneratorExpansion {
    std::vector<double> deltas;
    /// Real Pauli components (I, x, y, z) of h(T) per delta.
    std::vector<std::array<double, 4>> components;
    std::vector<double> tau_max;
    std::vector<double> tau_min;
    std::vector<double> optimal_qfi;
    std::array<PolynomialFit, 4> pauli_fit;
    /// Fit of (tau_max - tau_min)/2, insensitive to identity shifts.
    PolynomialFit half_gap_fit;
    PolynomialFit qfi_fit;
};

/// h(T) under the controlled drive for g_c = g + delta over a set of deltas (delta = g_c - g),
/// with polynomial fits of each Pauli component, the half gap and the optimal QFI in delta.
inline GeneratorExpansion expand_generator(const ParametricModel &model, double g, const TimeGrid &grid,
                                           std::span<const double> deltas, int degree = 2,
                                           const std::vector<PhaseRateFn> &f_k = {}) {
    if (model.dim != 2) {
        throw Error(ErrorCode::DimMismatch, "generator expansion is defined for qubit models");
    }
    GeneratorExpansion ex;
    for (double d : deltas) {
        if (std::abs(d) * grid.t_end() > 0.1) {
            throw Error(ErrorCode::InvalidConfig, "|delta| T must not exceed 0.1 for the expansion");
        }
        const HermitianOperator h = generator_integral(model, g, total_hamiltonian(model, g, {g + d, f_k}, grid), grid);
        const auto c = pauli_components(h.matrix());
        const OptimalQfi opt = optimal_qfi(h);
        ex.deltas.push_back(d);
        ex.components.push_back({c[0].real(), c[1].real(), c[2].real(), c[3].real()});
        ex.tau_max.push_back(opt.tau_max);
        ex.tau_min.push_back(opt.tau_min);
        ex.optimal_qfi.push_back(opt.value);
    }
    std::vector<double> col(ex.deltas.size()), half_gap(ex.deltas.size());
    for (size_t p = 0; p < 4; ++p) {
        for (size_t i = 0; i < col.size(); ++i) {
            col[i] = ex.components[i][p];
        }
        ex.pauli_fit[p] = fit_polynomial(ex.deltas, col, degree);
    }
    for (size_t i = 0; i < half_gap.size(); ++i) {
        half_gap[i] = 0.5 * (ex.tau_max[i] - ex.tau_min[i]);
    }
    ex.half_gap_fit = fit_polynomial(ex.deltas, half_gap, degree);
    ex.qfi_fit = fit_polynomial(ex.deltas, ex.optimal_qfi, degree);
    return ex;
}

}  // namespace qfictl
