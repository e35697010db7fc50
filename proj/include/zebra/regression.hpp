// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "zebra/error.hpp"

namespace zebra {

struct OlsResult {
    Eigen::VectorXd coefficients; // one per design column, intercept excluded
    double intercept = 0.0;
    double residual_norm = 0.0;
    double condition = 0.0; // of [1 | X], largest over smallest kept singular value
    int rank = 0;
};

/// Least squares fit of y on [1 | X] via SVD. When the design is
/// rank-deficient this returns the minimum-norm solution, which is what
/// normalized frequency columns need: they sum to one per row and are
/// therefore always collinear with the intercept.
inline OlsResult ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    if (X.rows() != y.size()) throw Error("ols_fit: X and y disagree on the sample count");
    if (X.rows() < 2) throw Error("ols_fit: need at least two samples");
    Eigen::MatrixXd design(X.rows(), X.cols() + 1);
    design.col(0).setOnes();
    design.rightCols(X.cols()) = X;

    Eigen::BDCSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Eigen::VectorXd beta = svd.solve(y);

    OlsResult out;
    out.intercept = beta(0);
    out.coefficients = beta.tail(X.cols());
    out.residual_norm = (design * beta - y).norm();
    out.rank = static_cast<int>(svd.rank());
    const auto& sigma = svd.singularValues();
    if (out.rank > 0) {
        out.condition = sigma(0) / sigma(out.rank - 1);
    }
    return out;
}

} // namespace zebra
