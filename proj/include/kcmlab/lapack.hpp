#pragma once

#include <Eigen/Dense>

namespace kcm {

/// Symmetric eigendecomposition via LAPACK dsyevd. `a` holds the matrix on
/// input; on output its columns are the eigenvectors (when requested).
/// Eigenvalues come back ascending.
void sym_eig(Eigen::MatrixXd& a, Eigen::VectorXd& evals, bool want_vectors);

} // namespace kcm
