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

#include "qfictl/control.hpp"

#include <numbers>

#include "test_util.hpp"

using namespace qfictl;

namespace {

const Matrix sx = pauli(Pauli::X);
const Matrix sy = pauli(Pauli::Y);
const Matrix sz = pauli(Pauli::Z);

ParametricModel omega_model(double B = 1.0, double w = 1.0) {
    return make_rotating_qubit({B, w, Estimand::Frequency});
}

ParametricModel static_derivative_model() {
    // H = g (sz + 0.5 sx) + cos(t) sy; dH/dg is time independent.
    const Matrix d = sz + 0.5 * sx;
    return make_callback_model(
        2, [d](double g, double t) { return HermitianOperator::hermitize(g * d + std::cos(t) * sy); },
        [d](double, double) { return HermitianOperator(d); });
}

}  // namespace

TEST(TrackEigenbasis, BranchesFollowPlusMinusTB) {
    const double B = 1.3;
    const TimeGrid grid(3.0, 3000);
    const TrackedBasis basis = track_eigenbasis(omega_model(B), 1.0, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double t = grid.point(i);
        EXPECT_NEAR(basis.at(i).values(basis.max_branch()), t * B, 1e-12);
        EXPECT_NEAR(basis.at(i).values(basis.min_branch()), -t * B, 1e-12);
    }
}

TEST(TrackEigenbasis, AgreesWithAnalyticBasis) {
    const auto m = omega_model();
    const TimeGrid grid(4.0, 4000);
    const TrackedBasis basis = track_eigenbasis(m, 1.0, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Matrix a = m.analytic_eigs(1.0, grid.point(i)).vectors;
        for (Index k = 0; k < 2; ++k) {
            EXPECT_GE(std::abs(a.col(k).dot(basis.at(i).vectors.col(k))), 1.0 - 1e-8);
        }
    }
}

TEST(TrackEigenbasis, ContinuityAndParallelTransport) {
    const TimeGrid grid(6.0, 6000);
    const TrackedBasis basis = track_eigenbasis(omega_model(1.0, 2.0), 2.0, grid);
    // |d psi / dt| = w/2 for the half-angle basis.
    const double rate = 1.0;
    for (std::size_t i = 0; i < grid.steps(); ++i) {
        for (Index k = 0; k < 2; ++k) {
            const Vector a = basis.at(i).vectors.col(k);
            const Vector b = basis.at(i + 1).vectors.col(k);
            EXPECT_LE((b - a).norm(), 1.01 * rate * grid.dt());
            EXPECT_LE(std::abs(a.dot(b) - 1.0), rate * rate * grid.dt() * grid.dt());
        }
    }
}

TEST(TrackEigenbasis, StaticDerivativeKeepsBasisAndIntegratesPhases) {
    const TimeGrid grid(2.0, 400);
    const std::vector<PhaseRateFn> f = {[](double) { return 0.5; }, [](double t) { return t; }};
    const TrackedBasis basis = track_eigenbasis(static_derivative_model(), 0.3, grid, f);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        EXPECT_MATRIX_NEAR(basis.at(i).vectors, basis.at(0).vectors, 1e-14);
        const double t = grid.point(i);
        EXPECT_NEAR(basis.phase(0, i), 0.5 * t, 1e-13);
        EXPECT_NEAR(basis.phase(1, i), 0.5 * t * t, 1e-13);
    }
}

TEST(TrackEigenbasis, PersistentDegeneracyIsRejected) {
    const auto m = make_callback_model(
        2, [](double g, double) { return HermitianOperator(g * identity(2)); },
        [](double, double) { return HermitianOperator(identity(2)); });
    try {
        track_eigenbasis(m, 1.0, TimeGrid(1.0, 100));
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::DegenerateDerivativeSpectrum);
    }
}

TEST(SynthesizeCd, MatchesAnalyticConstant) {
    for (double w : {1.0, 2.0}) {
        const auto m = omega_model(1.0, w);
        const TimeGrid grid(3.0, 3000);
        const CdHamiltonian cd = synthesize_cd(m, track_eigenbasis(m, w, grid));
        const Matrix expected = analytic_cd_qubit({1.0, w, Estimand::Frequency}).matrix();
        double worst = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            worst = std::max(worst, qfictl::testing::max_abs_diff(cd(grid.point(i)).matrix(), expected));
        }
        EXPECT_LE(worst, 1e-8) << "w=" << w;
    }
}

TEST(SynthesizeCd, StaticBasisGivesDiagonalRates) {
    const TimeGrid grid(1.0, 200);
    const std::vector<PhaseRateFn> f = {[](double) { return 0.7; }, [](double) { return -1.1; }};
    const TrackedBasis basis = track_eigenbasis(static_derivative_model(), 0.0, grid, f);
    const CdHamiltonian cd = synthesize_cd(static_derivative_model(), basis, f);
    const Matrix v = basis.at(0).vectors;
    const Matrix expected = 0.7 * v.col(0) * v.col(0).adjoint() - 1.1 * v.col(1) * v.col(1).adjoint();
    for (double t : {0.0, 0.3, 1.0}) {
        EXPECT_MATRIX_NEAR(cd(t).matrix(), expected, 1e-12);
    }
}

TEST(SynthesizeCd, TransitionlessDriving) {
    const auto m = omega_model(1.0, 1.5);
    const TimeGrid grid(4.0, 4000);
    const TrackedBasis basis = track_eigenbasis(m, 1.5, grid);
    const CdHamiltonian cd = synthesize_cd(m, basis);
    const Propagator p = propagate([&](double t) { return cd(t); }, grid);
    for (Index k = 0; k < 2; ++k) {
        const auto traj = evolve_state(p, basis.at(0).vectors.col(k));
        for (std::size_t i = 0; i < grid.size(); ++i) {
            EXPECT_GE(std::abs(basis.at(i).vectors.col(k).dot(traj[i])), 1.0 - 1e-5);
        }
    }
}

TEST(TotalHamiltonian, ReducesToCdAtControlPoint) {
    const auto m = omega_model();
    const TimeGrid grid(2.0, 1000);
    const ControlledDrive drive = make_controlled_drive(m, {1.0, {}}, grid);
    for (double t : {0.0, 0.5, 1.7, 2.0}) {
        EXPECT_TRUE(drive(1.0, t).matrix() == drive.cd()(t).matrix());
    }
}

TEST(TotalHamiltonian, ClosedFormForRotatingQubit) {
    const double B = 1.0, w = 1.02, w_c = 0.97;
    const auto m = omega_model(B, w);
    const TimeGrid grid(3.0, 3000);
    const DriveFn h = total_hamiltonian(m, w, {w_c, {}}, grid);
    for (double t : {0.0, 0.4, 1.1, 2.5, 3.0}) {
        const Matrix expected = -B * (std::cos(w * t) * sx + std::sin(w * t) * sz) +
                                B * (std::cos(w_c * t) * sx + std::sin(w_c * t) * sz) - 0.5 * w_c * sy;
        EXPECT_MATRIX_NEAR(h(t).matrix(), expected, 1e-9);
    }
}

TEST(TotalHamiltonian, ParameterDerivativeIsModelDerivative) {
    const auto m = omega_model();
    const TimeGrid grid(2.0, 1000);
    const ControlledDrive drive = make_controlled_drive(m, {1.0, {}}, grid);
    for (double g : {0.95, 1.0, 1.03}) {
        for (double t : {0.2, 1.0, 1.9}) {
            const double e = 1e-6;
            const Matrix fd = (drive(g + e, t).matrix() - drive(g - e, t).matrix()) / (2 * e);
            EXPECT_MATRIX_NEAR(fd, m.d_param_h(g, t).matrix(), 1e-6);
        }
    }
}

TEST(ControlledDrive, StateGuidance) {
    const auto m = omega_model();
    const TimeGrid grid(4.0, 4000);
    const ControlledDrive drive = make_controlled_drive(m, {1.0, {}}, grid);
    const TrackedBasis &basis = drive.basis();
    const Vector psi0 = (basis.at(0).vectors.col(0) + basis.at(0).vectors.col(1)) / std::sqrt(2.0);
    const auto traj = evolve_state(propagate(drive.at(1.0), grid), psi0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (Index k = 0; k < 2; ++k) {
            EXPECT_NEAR(std::abs(basis.at(i).vectors.col(k).dot(traj[i])), 1.0 / std::sqrt(2.0), 1e-4);
        }
    }
}

TEST(ControlledDrive, PhaseRatesAreAGaugeFreedom) {
    const auto m = omega_model();
    const TimeGrid grid(2.0, 4000);
    const std::vector<PhaseRateFn> f = {[](double t) { return 0.3 + 0.2 * t; }, [](double t) { return -0.7 * std::cos(t); }};
    const ControlledDrive plain = make_controlled_drive(m, {1.0, {}}, grid);
    const ControlledDrive phased = make_controlled_drive(m, {1.0, f}, grid);
    EXPECT_NE(phased.basis().phase(0, grid.steps()), 0.0);

    const EigenSystem &start = plain.basis().at(0);
    const auto traj = evolve_state(propagate(phased.at(1.0), grid), start.vectors.col(1));
    for (std::size_t i = 0; i < grid.size(); i += 40) {
        EXPECT_GE(std::abs(phased.basis().at(i).vectors.col(1).dot(traj[i])), 1.0 - 1e-6);
    }

    const double q_plain = optimal_qfi(generator_integral(m, 1.0, plain.at(1.0), grid)).value;
    const double q_phased = optimal_qfi(generator_integral(m, 1.0, phased.at(1.0), grid)).value;
    EXPECT_NEAR(q_phased, q_plain, 1e-6 * q_plain);
}

TEST(NaiveCd, WrongDerivativeScalesAsSquare) {
    const auto m = omega_model();
    std::vector<double> lt, lq;
    for (double T : {1.0, 2.0, 4.0, 8.0}) {
        const TimeGrid grid(T, static_cast<std::size_t>(500 * T));
        const auto fd = generator_derivative_factory(naive_cd_drive(m, grid), 1.0, grid, 1e-4);
        lt.push_back(std::log(T));
        lq.push_back(std::log(optimal_qfi(fd.generator).value));
    }
    const PolynomialFit fit = fit_polynomial(lt, lq, 1);
    EXPECT_NEAR(fit.coefficients[1], 2.0, 0.1);
}

TEST(ExpandGenerator, LeadingCoefficients) {
    const double B = 1.0, T = 2.0;
    const std::vector<double> deltas = {-0.005, -0.004, -0.003, -0.002, -0.001, 0.001, 0.002, 0.003, 0.004, 0.005};
    const GeneratorExpansion ex = expand_generator(omega_model(B), 1.0, TimeGrid(T, 4000), deltas);
    EXPECT_NEAR(ex.pauli_fit[3].coefficients[0] / (-B * T * T / 2), 1.0, 0.01);
    EXPECT_NEAR(ex.pauli_fit[1].coefficients[1] / (-B * T * T * T / 3), 1.0, 0.01);
    EXPECT_NEAR(ex.half_gap_fit.coefficients[2] / (-B * std::pow(T, 4) / 72), 1.0, 0.02);
    EXPECT_EQ(ex.deltas.size(), deltas.size());
}

TEST(ExpandGenerator, ExpansionCenterHasNoCorrections) {
    const std::vector<double> deltas = {0.0};
    const auto m = omega_model();
    const TimeGrid grid(2.0, 4000);
    const HermitianOperator h = generator_integral(m, 1.0, total_hamiltonian(m, 1.0, {1.0, {}}, grid), grid);
    const auto c = pauli_components(h.matrix());
    EXPECT_NEAR(c[1].real(), 0.0, 1e-6);
    EXPECT_NEAR(c[2].real(), 0.0, 1e-6);
    EXPECT_NEAR(c[3].real(), -2.0, 1e-4);
    EXPECT_THROW(expand_generator(m, 1.0, grid, deltas), Error);  // too few points for a quadratic
}

TEST(ExpandGenerator, RejectsLargeDetuning) {
    const std::vector<double> deltas = {-0.1, 0.0, 0.1};
    try {
        expand_generator(omega_model(), 1.0, TimeGrid(2.0, 400), deltas);
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidConfig);
    }
}
