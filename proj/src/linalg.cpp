#include "qrev/linalg.hpp"

#include <string>
#include <vector>

#include <cblas.h>
#include <lapacke.h>

namespace qrev::linalg {

namespace {

[[noreturn]] void fail(const char* routine, lapack_int info, Eigen::Index n) {
    throw NumericalError(std::string(routine) + " failed with info=" + std::to_string(info) +
                         " on a " + std::to_string(n) + "x" + std::to_string(n) + " symmetric matrix");
}

}  // namespace

Eigensystem symmetric_eigen(const Eigen::MatrixXd& matrix) {
    const Eigen::Index n = matrix.rows();
    if (n != matrix.cols()) throw std::invalid_argument("symmetric_eigen: matrix is not square");
    Eigensystem out;
    out.vectors = matrix;
    out.values.resize(n);
    if (n == 0) return out;
    const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', static_cast<lapack_int>(n),
                                           out.vectors.data(), static_cast<lapack_int>(n),
                                           out.values.data());
    if (info != 0) fail("dsyevd", info, n);
    return out;
}

PartialEigensystem symmetric_eigen_partial(Eigen::MatrixXd matrix, const RangeChooser& choose) {
    const Eigen::Index n = matrix.rows();
    if (n != matrix.cols() || n == 0) {
        throw std::invalid_argument("symmetric_eigen_partial: matrix must be square and non-empty");
    }
    const auto ln = static_cast<lapack_int>(n);

    Eigen::VectorXd diag(n);
    Eigen::VectorXd off(n);
    Eigen::VectorXd tau(std::max<Eigen::Index>(n - 1, 1));
    off.setZero();
    lapack_int info = LAPACKE_dsytrd(LAPACK_COL_MAJOR, 'L', ln, matrix.data(), ln, diag.data(),
                                     off.data(), tau.data());
    if (info != 0) fail("dsytrd", info, n);

    PartialEigensystem out;
    out.all_values = diag;
    Eigen::VectorXd scratch = off;
    info = LAPACKE_dsterf(ln, out.all_values.data(), scratch.data());
    if (info != 0) fail("dsterf", info, n);

    out.range = choose(std::span<const double>(out.all_values.data(), static_cast<std::size_t>(n)));
    if (out.range.last >= static_cast<std::size_t>(n) || out.range.first > out.range.last) {
        throw std::invalid_argument("symmetric_eigen_partial: chosen range outside the spectrum");
    }
    const auto m = static_cast<lapack_int>(out.range.size());

    Eigen::VectorXd d = diag;
    Eigen::VectorXd e = off;
    Eigen::VectorXd w(n);
    out.vectors.resize(n, m);
    std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(m));
    lapack_int found = 0;
    lapack_logical tryrac = 1;
    info = LAPACKE_dstemr(LAPACK_COL_MAJOR, 'V', 'I', ln, d.data(), e.data(), 0.0, 0.0,
                          static_cast<lapack_int>(out.range.first) + 1,
                          static_cast<lapack_int>(out.range.last) + 1, &found, w.data(),
                          out.vectors.data(), ln, m, isuppz.data(), &tryrac);
    if (info != 0 || found != m) fail("dstemr", info != 0 ? info : -1, n);

    info = LAPACKE_dormtr(LAPACK_COL_MAJOR, 'L', 'L', 'N', ln, m, matrix.data(), ln, tau.data(),
                          out.vectors.data(), ln);
    if (info != 0) fail("dormtr", info, n);

    for (lapack_int k = 0; k < m; ++k) out.all_values[static_cast<Eigen::Index>(out.range.first) + k] = w[k];
    return out;
}

void set_blas_threads(int n) { openblas_set_num_threads(n); }

}  // namespace qrev::linalg
