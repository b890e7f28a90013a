#pragma once

#include <functional>
#include <span>

#include <Eigen/Dense>

#include "qrev/common.hpp"

namespace qrev::linalg {

/// Eigenpairs of a real symmetric matrix, eigenvalues ascending, eigenvectors
/// as columns.
struct Eigensystem {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
};

/// Full dense decomposition (LAPACK divide and conquer).
Eigensystem symmetric_eigen(const Eigen::MatrixXd& matrix);

/// Decomposition that returns every eigenvalue but eigenvectors only for an
/// index range picked by the caller once the spectrum is known. The matrix is
/// reduced to tridiagonal form once; memory stays O(n^2 + n * range).
struct PartialEigensystem {
    Eigen::VectorXd all_values;
    IndexRange range;
    Eigen::MatrixXd vectors;  // n x range.size()
};

using RangeChooser = std::function<IndexRange(std::span<const double>)>;

PartialEigensystem symmetric_eigen_partial(Eigen::MatrixXd matrix, const RangeChooser& choose);

/// Pin the BLAS backend to a fixed thread count so results do not depend on
/// how many threads the library decides to spawn.
void set_blas_threads(int n);

}  // namespace qrev::linalg
