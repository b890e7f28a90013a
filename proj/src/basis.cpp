#include "qrev/basis.hpp"

#include <cmath>
#include <map>
#include <string>

namespace qrev {

namespace {

bool has_exchange(Sector s) {
    return s == Sector::even_even_sym || s == Sector::even_even_anti || s == Sector::odd_odd_sym ||
           s == Sector::odd_odd_anti;
}

double exchange_sign(Sector s) {
    return (s == Sector::even_even_anti || s == Sector::odd_odd_anti) ? -1.0 : 1.0;
}

bool parity_ok(Sector s, int n1, int n2) {
    switch (s) {
        case Sector::full: return true;
        case Sector::even_even_sym:
        case Sector::even_even_anti: return n1 % 2 == 0 && n2 % 2 == 0;
        case Sector::odd_odd_sym:
        case Sector::odd_odd_anti: return n1 % 2 == 1 && n2 % 2 == 1;
        case Sector::even_odd: return n1 % 2 == 0 && n2 % 2 == 1;
    }
    return false;
}

bool is_representative(Sector s, int n1, int n2) {
    if (!parity_ok(s, n1, n2)) return false;
    if (!has_exchange(s)) return true;
    if (n1 < n2) return false;
    return !(n1 == n2 && exchange_sign(s) < 0.0);
}

}  // namespace

OscillatorBasis build_basis(double hbar, double e_cutoff, Sector sector, std::size_t max_states) {
    if (!(hbar > 0.0)) throw std::invalid_argument("build_basis: hbar must be positive");
    if (!(e_cutoff > 0.0)) throw std::invalid_argument("build_basis: e_cutoff must be positive");
    if (e_cutoff < hbar) {
        throw std::invalid_argument("build_basis: e_cutoff below the ground-state energy hbar");
    }
    // largest total quantum number with hbar (n + 1) <= e_cutoff, guarded against
    // ratios that land a hair below an integer
    const double ratio = e_cutoff / hbar;
    auto n_total = static_cast<long long>(std::floor(ratio * (1.0 + 1e-12))) - 1;
    if (hbar * static_cast<double>(n_total + 1) > e_cutoff * (1.0 + 1e-12)) --n_total;

    const double full_count = 0.5 * static_cast<double>(n_total + 1) * static_cast<double>(n_total + 2);
    // no sector shrinks the product basis by more than a factor of ~8
    if (full_count > 16.0 * static_cast<double>(max_states)) {
        throw std::invalid_argument("build_basis: requested basis (~" + std::to_string(full_count) +
                                    " product states) exceeds the configured cap of " +
                                    std::to_string(max_states));
    }

    OscillatorBasis basis;
    basis.hbar = hbar;
    basis.e_cutoff = e_cutoff;
    basis.n_max_per_mode = static_cast<int>(n_total);
    basis.sector = sector;
    const auto width = static_cast<std::size_t>(n_total + 1);
    basis.lookup_.assign(width * width, -1);
    for (int total = 0; total <= n_total; ++total) {
        for (int n1 = 0; n1 <= total; ++n1) {
            const int n2 = total - n1;
            if (!is_representative(sector, n1, n2)) continue;
            basis.lookup_[static_cast<std::size_t>(n1) * width + static_cast<std::size_t>(n2)] =
                static_cast<std::ptrdiff_t>(basis.states.size());
            basis.states.push_back({n1, n2});
            if (basis.states.size() > max_states) {
                throw std::invalid_argument("build_basis: basis size exceeds the configured cap of " +
                                            std::to_string(max_states) + " states");
            }
        }
    }
    return basis;
}

std::vector<Component> OscillatorBasis::components(std::size_t i) const {
    const ModeState s = states.at(i);
    if (!has_exchange(sector) || s.n1 == s.n2) return {{s, 1.0}};
    const double c = 1.0 / std::sqrt(2.0);
    return {{s, c}, {{s.n2, s.n1}, exchange_sign(sector) * c}};
}

std::optional<std::pair<std::size_t, double>> OscillatorBasis::locate(ModeState s) const {
    if (s.n1 < 0 || s.n2 < 0 || s.n1 + s.n2 > n_max_per_mode) return std::nullopt;
    if (!parity_ok(sector, s.n1, s.n2)) return std::nullopt;
    ModeState rep = s;
    double coef = 1.0;
    if (has_exchange(sector)) {
        if (s.n1 == s.n2) {
            if (exchange_sign(sector) < 0.0) return std::nullopt;
        } else {
            coef = 1.0 / std::sqrt(2.0);
            if (s.n1 < s.n2) {
                rep = {s.n2, s.n1};
                coef *= exchange_sign(sector);
            }
        }
    }
    const auto width = static_cast<std::size_t>(n_max_per_mode + 1);
    const auto idx = lookup_[static_cast<std::size_t>(rep.n1) * width + static_cast<std::size_t>(rep.n2)];
    if (idx < 0) return std::nullopt;
    return std::pair{static_cast<std::size_t>(idx), coef};
}

double q_squared_element(int n, int m, double hbar) {
    if (n < 0 || m < 0) throw std::invalid_argument("q_squared_element: negative occupation");
    if (n == m) return hbar * (n + 0.5);
    const int lo = std::min(n, m);
    if (std::abs(n - m) == 2) return 0.5 * hbar * std::sqrt(static_cast<double>(lo + 1) * (lo + 2));
    return 0.0;
}

Eigen::VectorXd oscillator_energies(const OscillatorBasis& basis) {
    Eigen::VectorXd e(static_cast<Eigen::Index>(basis.size()));
    for (std::size_t i = 0; i < basis.size(); ++i) {
        e[static_cast<Eigen::Index>(i)] = basis.hbar * (basis.states[i].n1 + basis.states[i].n2 + 1);
    }
    return e;
}

Eigen::SparseMatrix<double> quartic_operator(const OscillatorBasis& basis) {
    const double hbar = basis.hbar;
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(basis.size() * 9);
    std::map<std::size_t, double> row;
    for (std::size_t i = 0; i < basis.size(); ++i) {
        row.clear();
        for (const auto& [c, coef] : basis.components(i)) {
            for (int d1 = -2; d1 <= 2; d1 += 2) {
                for (int d2 = -2; d2 <= 2; d2 += 2) {
                    const ModeState t{c.n1 + d1, c.n2 + d2};
                    const auto hit = basis.locate(t);
                    if (!hit) continue;
                    const double v = q_squared_element(c.n1, t.n1, hbar) * q_squared_element(c.n2, t.n2, hbar);
                    row[hit->first] += coef * hit->second * v;
                }
            }
        }
        for (const auto& [j, v] : row) {
            if (v != 0.0) triplets.emplace_back(static_cast<int>(i), static_cast<int>(j), v);
        }
    }
    const auto n = static_cast<Eigen::Index>(basis.size());
    Eigen::SparseMatrix<double> b(n, n);
    b.setFromTriplets(triplets.begin(), triplets.end());
    // exact symmetry: the element list is computed twice, once from each side
    Eigen::SparseMatrix<double> bt = b.transpose();
    return 0.5 * (b + bt);
}

Eigen::SparseMatrix<double> hamiltonian_sparse(const OscillatorBasis& basis, double x) {
    Eigen::SparseMatrix<double> h = x * quartic_operator(basis);
    const Eigen::VectorXd e0 = oscillator_energies(basis);
    for (Eigen::Index i = 0; i < e0.size(); ++i) h.coeffRef(i, i) += e0[i];
    h.makeCompressed();
    return h;
}

Eigen::MatrixXd build_hamiltonian_matrix(const OscillatorBasis& basis, double x) {
    return Eigen::MatrixXd(hamiltonian_sparse(basis, x));
}

}  // namespace qrev
