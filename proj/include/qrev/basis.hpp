#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "qrev/common.hpp"

namespace qrev {

/// Occupation numbers of the two oscillator modes.
struct ModeState {
    int n1 = 0;
    int n2 = 0;
    friend bool operator==(const ModeState&, const ModeState&) = default;
};

/// One product-basis term of a (possibly symmetrised) basis vector.
struct Component {
    ModeState state;
    double coefficient = 1.0;
};

inline constexpr std::size_t kDefaultBasisCap = 40000;

/// Truncated product basis of two harmonic oscillators with frequency 1.
///
/// `states` holds every (n1, n2) with hbar * (n1 + n2 + 1) <= e_cutoff, ordered
/// by (n1 + n2, n1). For a symmetry sector only representatives are kept:
/// parity-filtered pairs, and for the exchange sectors pairs with n1 >= n2
/// standing for (|n1 n2> +- |n2 n1>) / sqrt(2).
struct OscillatorBasis {
    double hbar = 0.0;
    double e_cutoff = 0.0;
    int n_max_per_mode = 0;
    Sector sector = Sector::full;
    std::vector<ModeState> states;

    [[nodiscard]] std::size_t size() const { return states.size(); }

    /// Product-basis expansion of basis vector `i` (one or two terms).
    [[nodiscard]] std::vector<Component> components(std::size_t i) const;

    /// Index and coefficient of the basis vector containing a product state,
    /// or nothing when the state lies outside the truncation or the sector.
    [[nodiscard]] std::optional<std::pair<std::size_t, double>> locate(ModeState s) const;

private:
    friend OscillatorBasis build_basis(double, double, Sector, std::size_t);
    std::vector<std::ptrdiff_t> lookup_;  // (n1, n2) -> index, -1 if absent
};

OscillatorBasis build_basis(double hbar, double e_cutoff, Sector sector = Sector::full,
                            std::size_t max_states = kDefaultBasisCap);

/// <n|Q^2|m> for a single mode: hbar (n + 1/2) on the diagonal,
/// (hbar/2) sqrt((n+1)(n+2)) two steps off, zero otherwise.
double q_squared_element(int n, int m, double hbar);

/// Diagonal of the quadratic part, hbar (n1 + n2 + 1).
Eigen::VectorXd oscillator_energies(const OscillatorBasis& basis);

/// The coupling operator Q1^2 Q2^2 in the basis.
Eigen::SparseMatrix<double> quartic_operator(const OscillatorBasis& basis);

/// H(x) = (P1^2 + P2^2 + Q1^2 + Q2^2)/2 + x Q1^2 Q2^2, sparse.
Eigen::SparseMatrix<double> hamiltonian_sparse(const OscillatorBasis& basis, double x);

/// Dense version of hamiltonian_sparse.
Eigen::MatrixXd build_hamiltonian_matrix(const OscillatorBasis& basis, double x);

}  // namespace qrev
