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

// Dense complex matrix kernel: Hermitian / unitary value types, eigendecomposition with
// deterministic gauge fixing, the unitary exponential of a Hermitian generator, and Pauli algebra.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include "qfictl/error.hpp"

namespace qfictl {

using cplx = std::complex<double>;
using Index = Eigen::Index;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr cplx kI{0.0, 1.0};

enum class Pauli { X, Y, Z };

enum class GaugePolicy { LargestComponentRealPositive, ParallelTransport };

inline Matrix identity(Index dim) {
    return Matrix::Identity(dim, dim);
}

inline Matrix pauli(Pauli p) {
    Matrix m(2, 2);
    switch (p) {
        case Pauli::X: m << 0.0, 1.0, 1.0, 0.0; break;
        case Pauli::Y: m << 0.0, -kI, kI, 0.0; break;
        case Pauli::Z: m << 1.0, 0.0, 0.0, -1.0; break;
    }
    return m;
}

inline Matrix commutator(const Matrix &a, const Matrix &b) {
    return a * b - b * a;
}

inline bool all_finite(const Matrix &m) {
    return m.allFinite();
}

/// Coefficients (c0, cx, cy, cz) of a 2x2 matrix in the basis {I, sx, sy, sz}; each is tr(P m)/2.
inline std::array<cplx, 4> pauli_components(const Matrix &m) {
    if (m.rows() != 2 || m.cols() != 2) {
        throw Error(ErrorCode::DimMismatch, "pauli_components needs a 2x2 matrix");
    }
    return {(m(0, 0) + m(1, 1)) / 2.0, (m(0, 1) + m(1, 0)) / 2.0, kI * (m(0, 1) - m(1, 0)) / 2.0,
            (m(0, 0) - m(1, 1)) / 2.0};
}

/// Dense Hermitian matrix. The checked constructor enforces
/// ||A - A^dagger||_F <= 1e-12 max(1, ||A||_F) and finiteness.
class HermitianOperator {
   public:
    explicit HermitianOperator(Matrix m) : m_(std::move(m)) {
        if (m_.rows() != m_.cols() || m_.rows() < 1) {
            throw Error(ErrorCode::InvalidMatrix, "operator must be square with dim >= 1");
        }
        if (!all_finite(m_)) {
            throw Error(ErrorCode::InvalidMatrix, "non-finite entry");
        }
        const double resid = (m_ - m_.adjoint()).norm();
        if (resid > 1e-12 * std::max(1.0, m_.norm())) {
            throw Error(ErrorCode::InvalidMatrix, "matrix is not Hermitian");
        }
    }

    /// Symmetric part (A + A^dagger)/2 of a computed matrix; only finiteness is checked.
    static HermitianOperator hermitize(const Matrix &m) {
        if (m.rows() != m.cols() || m.rows() < 1) {
            throw Error(ErrorCode::InvalidMatrix, "operator must be square with dim >= 1");
        }
        if (!all_finite(m)) {
            throw Error(ErrorCode::InvalidMatrix, "non-finite entry");
        }
        return HermitianOperator(Trusted{}, (m + m.adjoint()) / 2.0);
    }

    static HermitianOperator zero(Index dim) {
        return HermitianOperator(Trusted{}, Matrix::Zero(dim, dim));
    }

    const Matrix &matrix() const noexcept {
        return m_;
    }
    Index dim() const noexcept {
        return m_.rows();
    }

    friend HermitianOperator operator+(const HermitianOperator &a, const HermitianOperator &b) {
        check_dims(a, b);
        return HermitianOperator(Trusted{}, a.m_ + b.m_);
    }
    friend HermitianOperator operator-(const HermitianOperator &a, const HermitianOperator &b) {
        check_dims(a, b);
        return HermitianOperator(Trusted{}, a.m_ - b.m_);
    }
    friend HermitianOperator operator-(const HermitianOperator &a) {
        return HermitianOperator(Trusted{}, -a.m_);
    }
    friend HermitianOperator operator*(double s, const HermitianOperator &a) {
        return HermitianOperator(Trusted{}, s * a.m_);
    }
    friend HermitianOperator operator*(const HermitianOperator &a, double s) {
        return s * a;
    }

   private:
    struct Trusted {};
    HermitianOperator(Trusted, Matrix m) : m_(std::move(m)) {
    }
    static void check_dims(const HermitianOperator &a, const HermitianOperator &b) {
        if (a.dim() != b.dim()) {
            throw Error(ErrorCode::DimMismatch, "operator dimensions differ");
        }
    }

    Matrix m_;
};

/// Dense unitary matrix, ||U^dagger U - I||_F <= 1e-9.
class UnitaryMatrix {
   public:
    explicit UnitaryMatrix(Matrix m) : m_(std::move(m)) {
        if (m_.rows() != m_.cols() || m_.rows() < 1 || !all_finite(m_)) {
            throw Error(ErrorCode::InvalidMatrix, "unitary must be square, finite, dim >= 1");
        }
        if ((m_.adjoint() * m_ - identity(m_.rows())).norm() > 1e-9) {
            throw Error(ErrorCode::InvalidMatrix, "matrix is not unitary");
        }
    }

    static UnitaryMatrix identity_of(Index dim) {
        return UnitaryMatrix(Trusted{}, identity(dim));
    }

    const Matrix &matrix() const noexcept {
        return m_;
    }
    Index dim() const noexcept {
        return m_.rows();
    }
    UnitaryMatrix adjoint() const {
        return UnitaryMatrix(Trusted{}, m_.adjoint());
    }

    friend UnitaryMatrix operator*(const UnitaryMatrix &a, const UnitaryMatrix &b) {
        if (a.dim() != b.dim()) {
            throw Error(ErrorCode::DimMismatch, "unitary dimensions differ");
        }
        return UnitaryMatrix(Trusted{}, a.m_ * b.m_);
    }

   private:
    struct Trusted {};
    UnitaryMatrix(Trusted, Matrix m) : m_(std::move(m)) {
    }
    friend UnitaryMatrix exp_skew(const HermitianOperator &a, double s);

    Matrix m_;
};

/// Eigenvalues and eigenvector columns. From eig_hermitian the values are ascending; after
/// align_to_reference the columns follow the reference's branch order instead.
struct EigenSystem {
    RealVector values;
    Matrix vectors;
    GaugePolicy gauge = GaugePolicy::LargestComponentRealPositive;

    Index dim() const noexcept {
        return values.size();
    }
};

namespace detail {

inline void fix_largest_component_gauge(Matrix &vectors) {
    for (Index k = 0; k < vectors.cols(); ++k) {
        auto col = vectors.col(k);
        const double largest = col.cwiseAbs().maxCoeff();
        Index pick = 0;
        // First entry within rounding of the maximum, so ties resolve deterministically.
        for (Index i = 0; i < col.size(); ++i) {
            if (std::abs(col(i)) >= largest * (1.0 - 1e-12)) {
                pick = i;
                break;
            }
        }
        const cplx entry = col(pick);
        col *= std::conj(entry) / std::abs(entry);
        col(pick) = std::abs(col(pick));
    }
}

inline EigenSystem eig_2x2(const Matrix &a) {
    const double p = a(0, 0).real();
    const double q = a(1, 1).real();
    const cplx b = a(0, 1);
    const double mean = 0.5 * (p + q);
    const double half_diff = 0.5 * (p - q);
    const double r = std::hypot(half_diff, std::abs(b));

    EigenSystem es;
    es.values.resize(2);
    es.vectors = identity(2);
    if (r == 0.0) {
        es.values << mean, mean;
        return es;
    }
    es.values << mean - r, mean + r;
    // Eigenvector of the upper eigenvalue, choosing the form without cancellation.
    Vector up(2);
    if (half_diff >= 0.0) {
        up << r + half_diff, std::conj(b);
    } else {
        up << b, r - half_diff;
    }
    up.normalize();
    es.vectors(0, 1) = up(0);
    es.vectors(1, 1) = up(1);
    es.vectors(0, 0) = -std::conj(up(1));
    es.vectors(1, 0) = std::conj(up(0));
    return es;
}

}  // namespace detail

/// Hermitian eigendecomposition: closed form for dim 2, Eigen's self-adjoint solver otherwise.
/// A reference-free decomposition has no transport partner, so ParallelTransport falls back to the
/// LargestComponentRealPositive convention here; see align_to_reference for the transported gauge.
inline EigenSystem eig_hermitian(const HermitianOperator &a,
                                 GaugePolicy policy = GaugePolicy::LargestComponentRealPositive) {
    EigenSystem es;
    if (a.dim() == 2) {
        es = detail::eig_2x2(a.matrix());
    } else {
        Eigen::SelfAdjointEigenSolver<Matrix> solver(a.matrix());
        if (solver.info() != Eigen::Success) {
            throw Error(ErrorCode::NumericalError, "eigensolver did not converge");
        }
        es.values = solver.eigenvalues();
        es.vectors = solver.eigenvectors();
    }
    detail::fix_largest_component_gauge(es.vectors);
    es.gauge = policy;
    return es;
}

/// Reorders the columns of `es` to match the columns of `reference` by maximal overlap and
/// rephases each so that <reference_k | v_k> is real and positive (discrete parallel transport).
inline EigenSystem align_to_reference(const EigenSystem &es, const Matrix &reference) {
    if (reference.rows() != es.vectors.rows() || reference.cols() != es.vectors.cols()) {
        throw Error(ErrorCode::DimMismatch, "reference basis has the wrong shape");
    }
    const Index n = es.dim();
    const Eigen::MatrixXd overlap = (reference.adjoint() * es.vectors).cwiseAbs();

    // Greedy assignment on the overlap matrix; exact for the well-separated steps tracking produces.
    std::vector<Index> assignment(static_cast<size_t>(n), -1);
    std::vector<bool> used_ref(static_cast<size_t>(n), false), used_new(static_cast<size_t>(n), false);
    for (Index round = 0; round < n; ++round) {
        double best = -1.0;
        Index bi = 0, bj = 0;
        for (Index i = 0; i < n; ++i) {
            if (used_ref[static_cast<size_t>(i)]) continue;
            for (Index j = 0; j < n; ++j) {
                if (used_new[static_cast<size_t>(j)]) continue;
                if (overlap(i, j) > best) {
                    best = overlap(i, j);
                    bi = i;
                    bj = j;
                }
            }
        }
        assignment[static_cast<size_t>(bi)] = bj;
        used_ref[static_cast<size_t>(bi)] = true;
        used_new[static_cast<size_t>(bj)] = true;
    }

    EigenSystem out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    out.gauge = GaugePolicy::ParallelTransport;
    for (Index k = 0; k < n; ++k) {
        const Index src = assignment[static_cast<size_t>(k)];
        out.values(k) = es.values(src);
        Vector v = es.vectors.col(src);
        const cplx ov = reference.col(k).dot(v);
        if (std::abs(ov) > 0.0) {
            v *= std::conj(ov) / std::abs(ov);
        }
        out.vectors.col(k) = v;
    }
    return out;
}

/// Largest |eigenvalue|.
inline double spectral_norm(const HermitianOperator &a) {
    return eig_hermitian(a).values.cwiseAbs().maxCoeff();
}

/// exp(-i s A). Exactly the identity for s == 0.
inline UnitaryMatrix exp_skew(const HermitianOperator &a, double s) {
    const Index n = a.dim();
    if (s == 0.0) {
        return UnitaryMatrix::identity_of(n);
    }
    if (n == 2) {
        // Spectral calculus on A = mean I + (A - mean I), where (A - mean I)^2 = r^2 I.
        const Matrix &m = a.matrix();
        const double mean = 0.5 * (m(0, 0).real() + m(1, 1).real());
        const double half_diff = 0.5 * (m(0, 0).real() - m(1, 1).real());
        const double r = std::hypot(half_diff, std::abs(m(0, 1)));
        const double x = s * r;
        const double sinc = (x == 0.0) ? 1.0 : std::sin(x) / x;
        Matrix traceless = m - mean * identity(2);
        Matrix u = std::cos(x) * identity(2) - kI * (s * sinc) * traceless;
        u *= std::exp(-kI * (s * mean));
        return UnitaryMatrix(UnitaryMatrix::Trusted{}, std::move(u));
    }
    const EigenSystem es = eig_hermitian(a);
    Vector phases(n);
    for (Index k = 0; k < n; ++k) {
        phases(k) = std::exp(-kI * (s * es.values(k)));
    }
    Matrix u = es.vectors * phases.asDiagonal() * es.vectors.adjoint();
    return UnitaryMatrix(UnitaryMatrix::Trusted{}, std::move(u));
}

/// exp(i alpha s_i) s_j exp(-i alpha s_i) in closed form.
inline Matrix conjugate_pauli(Pauli i, Pauli j, double alpha) {
    if (i == j) {
        return pauli(i);
    }
    const Matrix si = pauli(i);
    const Matrix sj = pauli(j);
    return std::cos(2.0 * alpha) * sj + (0.5 * kI * std::sin(2.0 * alpha)) * commutator(si, sj);
}

inline cplx expectation(const Matrix &a, const Vector &psi) {
    if (a.rows() != psi.size()) {
        throw Error(ErrorCode::DimMismatch, "state dimension does not match operator");
    }
    return psi.dot(a * psi);
}

}  // namespace qfictl
