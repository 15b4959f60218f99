#pragma once

#include <Eigen/Dense>

namespace epictrl {

// Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
// Eigenvalues returned ascending, eigenvectors as the matching columns.
// Intended for the small (n <= a few hundred) matrices used here.
void jacobi_symmetric_eig(const Eigen::MatrixXd& sym, Eigen::VectorXd& evals,
                          Eigen::MatrixXd& evecs);

// Stationary distribution of an irreducible CTMC generator (rows sum to 0):
// solves pi Q = 0, sum(pi) = 1 by dense LU with partial pivoting.
Eigen::VectorXd ctmc_stationary(const Eigen::MatrixXd& generator);

} // namespace epictrl
