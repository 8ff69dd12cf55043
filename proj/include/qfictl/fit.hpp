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
#include <span>
#include <vector>

#include "qfictl/operators.hpp"

namespace qfictl {

struct PolynomialFit {
    /// coefficients[p] multiplies x^p.
    std::vector<double> coefficients;
    std::vector<double> standard_errors;
};

/// Ordinary least squares fit of y to a polynomial of the given degree in x.
inline PolynomialFit fit_polynomial(std::span<const double> x, std::span<const double> y, int degree) {
    const auto n = static_cast<Index>(x.size());
    const Index p = degree + 1;
    if (degree < 0 || x.size() != y.size() || n <= p) {
        throw Error(ErrorCode::FitError, "need more samples than polynomial coefficients");
    }
    Eigen::MatrixXd design(n, p);
    Eigen::VectorXd rhs(n);
    for (Index i = 0; i < n; ++i) {
        double v = 1.0;
        for (Index k = 0; k < p; ++k) {
            design(i, k) = v;
            v *= x[static_cast<size_t>(i)];
        }
        rhs(i) = y[static_cast<size_t>(i)];
    }
    // Column scaling keeps the conditioning test meaningful for tiny abscissae.
    Eigen::VectorXd scale = design.colwise().norm().transpose();
    for (Index k = 0; k < p; ++k) {
        if (scale(k) == 0.0) {
            throw Error(ErrorCode::FitError, "degenerate design matrix");
        }
        design.col(k) /= scale(k);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto &sv = svd.singularValues();
    if (sv(p - 1) <= 0.0 || sv(0) / sv(p - 1) > 1e12) {
        throw Error(ErrorCode::FitError, "ill-conditioned polynomial fit");
    }
    const Eigen::VectorXd beta = svd.solve(rhs);
    const Eigen::VectorXd resid = design * beta - rhs;
    const double sigma2 = resid.squaredNorm() / static_cast<double>(n - p);
    const Eigen::MatrixXd vinv = svd.matrixV() * sv.cwiseInverse().cwiseAbs2().asDiagonal() * svd.matrixV().transpose();

    PolynomialFit fit;
    for (Index k = 0; k < p; ++k) {
        fit.coefficients.push_back(beta(k) / scale(k));
        fit.standard_errors.push_back(std::sqrt(sigma2 * vinv(k, k)) / scale(k));
    }
    return fit;
}

}  // namespace qfictl
