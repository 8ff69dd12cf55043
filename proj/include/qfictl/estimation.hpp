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

// Measurement of O = |+><+| - |-><-| after the controlled evolution, and the adaptive loop that
// re-centres the control on the running estimate of g.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "qfictl/control.hpp"
#include "qfictl/fisher.hpp"

namespace qfictl {

struct MeasurementSetup {
    HermitianOperator observable;
    Vector plus;
    Vector minus;
    double theta_max = 0.0;
    double theta_min = 0.0;
    std::size_t shots = 1;
};

/// |+-> = (e^{-i theta_max} psi_max +- e^{-i theta_min} psi_min) / sqrt(2).
inline MeasurementSetup build_observable(const Vector &psi_max, const Vector &psi_min, double theta_max,
                                         double theta_min, std::size_t shots = 1) {
    if (psi_max.size() != psi_min.size()) {
        throw Error(ErrorCode::DimMismatch, "extreme eigenvectors differ in dimension");
    }
    if (std::abs(psi_max.norm() - 1.0) > 1e-9 || std::abs(psi_min.norm() - 1.0) > 1e-9 ||
        std::abs(psi_max.dot(psi_min)) > 1e-9) {
        throw Error(ErrorCode::BasisError, "extreme eigenvectors are not orthonormal");
    }
    if (shots < 1) {
        throw Error(ErrorCode::InvalidConfig, "need at least one shot");
    }
    const Vector a = std::exp(-kI * theta_max) * psi_max;
    const Vector b = std::exp(-kI * theta_min) * psi_min;
    const Vector plus = (a + b) / std::sqrt(2.0);
    const Vector minus = (a - b) / std::sqrt(2.0);
    const Matrix o = plus * plus.adjoint() - minus * minus.adjoint();
    return MeasurementSetup{HermitianOperator::hermitize(o), plus, minus, theta_max, theta_min, shots};
}

/// Observable from the tracked extreme branches and their accumulated phases at the final time.
inline MeasurementSetup build_observable(const TrackedBasis &basis, std::size_t shots = 1) {
    const std::size_t last = basis.grid().steps();
    const EigenSystem &es = basis.at(last);
    return build_observable(es.vectors.col(basis.max_branch()), es.vectors.col(basis.min_branch()),
                            basis.phase(basis.max_branch(), last), basis.phase(basis.min_branch(), last), shots);
}

struct ExpectedStatistics {
    double mean = 1.0;
    double variance = 0.0;
    /// variance / |d mean / d dg|^2 = 1 / gap_integral^2.
    double implied_dg2 = 0.0;
};

/// Leading-order statistics <O> = cos(dg G), <dO^2> = sin^2(dg G) with G the integrated gap.
inline ExpectedStatistics expected_statistics(double dg, double gap_integral) {
    if (!(gap_integral > 0.0)) {
        throw Error(ErrorCode::InvalidConfig, "integrated spectral gap must be positive");
    }
    const double x = dg * gap_integral;
    return {std::cos(x), std::sin(x) * std::sin(x), 1.0 / (gap_integral * gap_integral)};
}

/// |dg| = arccos(<O>) / G after clamping <O> into [-1, 1].
inline double infer_abs_delta(double mean, double gap_integral) {
    return std::acos(std::clamp(mean, -1.0, 1.0)) / gap_integral;
}

using Rng = std::mt19937_64;

/// Uniform double in [0, 1) from the top 53 bits; bit-reproducible across standard libraries.
inline double uniform01(Rng &rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct ShotRecord {
    std::vector<std::int8_t> outcomes;
    std::size_t plus = 0;
    std::size_t minus = 0;
    std::size_t zero = 0;
    double p_plus = 0.0;
    double p_minus = 0.0;

    double mean() const {
        return (static_cast<double>(plus) - static_cast<double>(minus)) / static_cast<double>(outcomes.size());
    }
    /// Sample variance of the +-1/0 outcomes (population normalisation).
    double variance() const {
        const double m = mean();
        return static_cast<double>(plus + minus) / static_cast<double>(outcomes.size()) - m * m;
    }
};

/// Born-rule outcomes +1, -1, 0 with p_+- = |<+-|psi>|^2 and p_0 the remainder.
inline ShotRecord sample_shots(const Vector &state, const MeasurementSetup &setup, Rng &rng) {
    if (state.size() != setup.plus.size()) {
        throw Error(ErrorCode::DimMismatch, "state dimension does not match observable");
    }
    if (std::abs(state.norm() - 1.0) > 1e-9) {
        throw Error(ErrorCode::NumericalError, "final state is not normalized");
    }
    const double pp = std::norm(setup.plus.dot(state));
    const double pm = std::norm(setup.minus.dot(state));
    const double p0 = 1.0 - pp - pm;
    for (double p : {pp, pm, p0}) {
        if (p < -1e-10 || p > 1.0 + 1e-10) {
            throw Error(ErrorCode::NumericalError, "outcome probability outside [0, 1]");
        }
    }
    ShotRecord rec;
    rec.p_plus = std::clamp(pp, 0.0, 1.0);
    rec.p_minus = std::clamp(pm, 0.0, 1.0 - rec.p_plus);
    rec.outcomes.reserve(setup.shots);
    for (std::size_t s = 0; s < setup.shots; ++s) {
        const double u = uniform01(rng);
        if (u < rec.p_plus) {
            rec.outcomes.push_back(1);
            ++rec.plus;
        } else if (u < rec.p_plus + rec.p_minus) {
            rec.outcomes.push_back(-1);
            ++rec.minus;
        } else {
            rec.outcomes.push_back(0);
            ++rec.zero;
        }
    }
    return rec;
}

inline ShotRecord sample_shots(const Vector &state, const MeasurementSetup &setup, std::uint64_t seed) {
    Rng rng(seed);
    return sample_shots(state, setup, rng);
}

/// One simulated experiment: control designed at g_c, physics at g_true, measurement of O.
struct Measurement {
    Vector initial_state;
    Vector final_state;
    MeasurementSetup setup;
    double gap_integral = 0.0;
};

inline Measurement simulate_measurement(const ParametricModel &model, double g_true, const ControlConfig &cfg,
                                        const TimeGrid &grid, std::size_t shots) {
    const ControlledDrive drive = make_controlled_drive(model, cfg, grid);
    const TrackedBasis &basis = drive.basis();
    const EigenSystem &start = basis.at(0);
    Vector psi0 = (start.vectors.col(basis.max_branch()) + start.vectors.col(basis.min_branch())) / std::sqrt(2.0);
    const Propagator prop = propagate(drive.at(g_true), grid);
    Vector psi_t = prop.final().matrix() * psi0;
    return Measurement{std::move(psi0), std::move(psi_t), build_observable(basis, shots),
                       gap_integral(model, cfg.g_c, grid)};
}

struct AdaptiveOptions {
    std::size_t rounds = 5;
    std::size_t shots = 10000;
    /// Shots for the sign-resolving probe; 0 means the same as `shots`.
    std::size_t probe_shots = 0;
    std::uint64_t seed = 0;
    std::vector<PhaseRateFn> f_k;
};

struct RoundRecord {
    double g_c = 0.0;
    double mean = 0.0;              ///< sample mean of O
    double sample_variance = 0.0;
    double abs_delta = 0.0;         ///< arccos(mean) / G
    bool clamped = false;           ///< mean had to be clamped into [-1, 1]
    double probe_g_c = 0.0;
    double probe_mean = 0.0;
    double probe_abs_delta = 0.0;
    int sign = 0;                   ///< +1 / -1 resolved direction, 0 if abs_delta == 0
    double estimate = 0.0;          ///< g_c + sign * abs_delta
    double g_next = 0.0;            ///< pooled mean of the estimates so far
};

struct EstimationTrace {
    std::uint64_t seed = 0;
    double g_c0 = 0.0;
    double gap_integral = 0.0;
    std::size_t shots_per_round = 0;
    std::vector<RoundRecord> rounds;

    double final_estimate() const {
        return rounds.back().g_next;
    }
    std::size_t total_shots() const {
        return shots_per_round * rounds.size();
    }
};

/// Adaptive estimation of g. g_true only enters the simulated evolution. Each round measures O with
/// control at g_c, infers |dg|, resolves the sign with a probe at g_c + |dg| (the side whose
/// inferred |dg| is smaller is the true side), and moves g_c to the pooled mean of all estimates.
inline EstimationTrace adaptive_estimate(const ParametricModel &model, double g_true, double g_c0,
                                         const TimeGrid &grid, const AdaptiveOptions &opt) {
    if (opt.rounds < 1 || opt.shots < 1) {
        throw Error(ErrorCode::InvalidConfig, "need at least one round and one shot");
    }
    EstimationTrace trace;
    trace.seed = opt.seed;
    trace.g_c0 = g_c0;
    trace.shots_per_round = opt.shots;
    trace.gap_integral = gap_integral(model, g_c0, grid);
    if (std::abs(g_true - g_c0) * trace.gap_integral >= std::numbers::pi) {
        throw Error(ErrorCode::AmbiguousPhase, "initial guess outside the arccos invertibility window");
    }

    Rng rng(opt.seed);
    const std::size_t probe_shots = opt.probe_shots ? opt.probe_shots : opt.shots;
    double g_c = g_c0;
    double estimate_sum = 0.0;
    for (std::size_t r = 0; r < opt.rounds; ++r) {
        RoundRecord rec;
        rec.g_c = g_c;
        const Measurement m = simulate_measurement(model, g_true, {g_c, opt.f_k}, grid, opt.shots);
        const ShotRecord shots = sample_shots(m.final_state, m.setup, rng);
        rec.mean = shots.mean();
        rec.sample_variance = shots.variance();
        if (std::abs(rec.mean) > 1.0 + 1e-12) {
            throw Error(ErrorCode::StatisticsError, "sample mean outside [-1, 1]");
        }
        rec.clamped = std::abs(rec.mean) > 1.0;
        rec.abs_delta = infer_abs_delta(rec.mean, m.gap_integral);

        if (rec.abs_delta > 0.0) {
            rec.probe_g_c = g_c + rec.abs_delta;
            const Measurement probe = simulate_measurement(model, g_true, {rec.probe_g_c, opt.f_k}, grid, probe_shots);
            const ShotRecord pshots = sample_shots(probe.final_state, probe.setup, rng);
            rec.probe_mean = pshots.mean();
            rec.probe_abs_delta = infer_abs_delta(rec.probe_mean, probe.gap_integral);
            rec.sign = rec.probe_abs_delta <= rec.abs_delta ? 1 : -1;
        } else {
            rec.probe_g_c = g_c;
            rec.probe_mean = rec.mean;
        }
        rec.estimate = g_c + rec.sign * rec.abs_delta;
        estimate_sum += rec.estimate;
        rec.g_next = estimate_sum / static_cast<double>(r + 1);
        g_c = rec.g_next;
        trace.rounds.push_back(rec);
    }
    return trace;
}

}  // namespace qfictl
