#pragma once

#include <Eigen/Dense>

namespace lmmcal {

struct Spectrum {
    Eigen::VectorXd eigenvalues;  // descending
    Eigen::MatrixXd eigenvectors; // orthonormal columns, matching order
    Eigen::VectorXd fractions;    // eigenvalue / trace, sums to 1
};

// Full symmetric eigendecomposition, eigenvalues descending, each vector's
// largest-|entry| coordinate made positive so results are plot-stable.
Spectrum spectrum(const Eigen::MatrixXd& X);

// Frobenius-nearest PSD matrix of rank <= d: keep the top-d nonnegative
// eigenpairs, zero everything else.
Eigen::MatrixXd reduce_rank(const Eigen::MatrixXd& X, int d);

// n x d loadings B with B B^T = reduce_rank(X, d), columns by eigenvalue.
Eigen::MatrixXd factor_loadings(const Eigen::MatrixXd& X, int d);

int count_sign_changes(const Eigen::VectorXd& v, double tol = 1e-12);

}  // namespace lmmcal
