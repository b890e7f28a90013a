#include <doctest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "qrev/basis.hpp"
#include "qrev/linalg.hpp"

using namespace qrev;

TEST_CASE("basis counts") {
    CHECK(build_basis(0.5, 3.0).size() == 21);
    const auto ground = build_basis(1.0, 1.0);
    REQUIRE(ground.size() == 1);
    CHECK(ground.states[0] == ModeState{0, 0});

    // brute-force enumeration of every pair with n1 + n2 <= 89
    std::size_t count = 0;
    for (int n1 = 0; n1 < 200; ++n1) {
        for (int n2 = 0; n2 < 200; ++n2) {
            if (0.05 * (n1 + n2 + 1) <= 4.5 + 1e-9) ++count;
        }
    }
    CHECK(count == 90 * 91 / 2);
    CHECK(build_basis(0.05, 4.5).size() == count);
}

TEST_CASE("basis ordering and uniqueness") {
    const auto basis = build_basis(0.1, 2.0);
    std::set<std::pair<int, int>> seen;
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const auto s = basis.states[i];
        CHECK(basis.hbar * (s.n1 + s.n2 + 1) <= basis.e_cutoff + 1e-12);
        CHECK(seen.insert({s.n1, s.n2}).second);
        if (i > 0) {
            const auto p = basis.states[i - 1];
            const bool ordered = p.n1 + p.n2 < s.n1 + s.n2 || (p.n1 + p.n2 == s.n1 + s.n2 && p.n1 < s.n1);
            CHECK(ordered);
        }
    }
}

TEST_CASE("basis rejects bad input") {
    CHECK_THROWS_AS(build_basis(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(build_basis(-1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(build_basis(1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(build_basis(1.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(build_basis(1e-4, 10.0), std::invalid_argument);
    CHECK_THROWS_AS(build_basis(0.05, 4.5, Sector::full, 1000), std::invalid_argument);
}

TEST_CASE("q squared elements") {
    CHECK(q_squared_element(0, 0, 0.012) == doctest::Approx(0.006).epsilon(1e-15));
    CHECK(q_squared_element(0, 2, 1.0) == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-15));
    CHECK(q_squared_element(2, 0, 1.0) == q_squared_element(0, 2, 1.0));
    CHECK(q_squared_element(7, 3, 0.3) == 0.0);
    CHECK(q_squared_element(4, 5, 0.3) == 0.0);
    CHECK_THROWS_AS(q_squared_element(-1, 0, 1.0), std::invalid_argument);
}

TEST_CASE("hamiltonian at x = 0 is the oscillator") {
    const auto basis = build_basis(0.2, 3.0);
    const Eigen::MatrixXd h = build_hamiltonian_matrix(basis, 0.0);
    for (Eigen::Index i = 0; i < h.rows(); ++i) {
        for (Eigen::Index j = 0; j < h.cols(); ++j) {
            const auto s = basis.states[static_cast<std::size_t>(i)];
            const double expected = i == j ? 0.2 * (s.n1 + s.n2 + 1) : 0.0;
            CHECK(h(i, j) == doctest::Approx(expected).epsilon(1e-14));
        }
    }
}

TEST_CASE("ground-state quartic element") {
    for (double x : {0.5, 1.0, 2.0}) {
        const auto basis = build_basis(0.3, 3.0);
        const Eigen::MatrixXd h = build_hamiltonian_matrix(basis, x);
        CHECK(h(0, 0) - 0.3 == doctest::Approx(x * 0.15 * 0.15).epsilon(1e-14));
    }
}

TEST_CASE("hamiltonian matches position-grid construction") {
    const auto basis = build_basis(1.0, 3.0);
    REQUIRE(basis.size() == 6);
    std::vector<std::pair<int, int>> states;
    for (const auto& s : basis.states) states.emplace_back(s.n1, s.n2);
    const Eigen::MatrixXd grid = oracle::grid_hamiltonian(states, 1.0, 1.0);
    const Eigen::MatrixXd h = build_hamiltonian_matrix(basis, 1.0);
    CHECK((grid - h).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("selection rule and hermiticity") {
    const auto basis = build_basis(0.1, 3.0);
    const Eigen::MatrixXd h = build_hamiltonian_matrix(basis, 1.0);
    CHECK((h - h.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * h.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < h.rows(); ++i) {
        for (Eigen::Index j = 0; j < h.cols(); ++j) {
            if (h(i, j) == 0.0) continue;
            const auto a = basis.states[static_cast<std::size_t>(i)];
            const auto b = basis.states[static_cast<std::size_t>(j)];
            const int d1 = std::abs(a.n1 - b.n1);
            const int d2 = std::abs(a.n2 - b.n2);
            CHECK((d1 == 0 || d1 == 2));
            CHECK((d2 == 0 || d2 == 2));
        }
    }
}

TEST_CASE("symmetry sectors partition the spectrum") {
    const double hbar = 0.25;
    const double cutoff = 4.0;
    const auto full = build_basis(hbar, cutoff);
    Eigen::VectorXd all = linalg::symmetric_eigen(build_hamiltonian_matrix(full, 1.0)).values;
    std::vector<double> merged;
    std::size_t total = 0;
    for (Sector s : {Sector::even_even_sym, Sector::even_even_anti, Sector::odd_odd_sym, Sector::odd_odd_anti,
                     Sector::even_odd}) {
        const auto basis = build_basis(hbar, cutoff, s);
        total += basis.size();
        const Eigen::VectorXd e = linalg::symmetric_eigen(build_hamiltonian_matrix(basis, 1.0)).values;
        merged.insert(merged.end(), e.data(), e.data() + e.size());
        // eo appears twice in the full space (eo and oe)
        if (s == Sector::even_odd) {
            merged.insert(merged.end(), e.data(), e.data() + e.size());
            total += basis.size();
        }
    }
    REQUIRE(total == full.size());
    std::sort(merged.begin(), merged.end());
    for (std::size_t i = 0; i < merged.size(); ++i) {
        CHECK(merged[i] == doctest::Approx(all[static_cast<Eigen::Index>(i)]).epsilon(1e-11));
    }
}

TEST_CASE("sector basis vectors are orthonormal combinations") {
    const auto basis = build_basis(0.2, 3.0, Sector::even_even_anti);
    for (std::size_t i = 0; i < basis.size(); ++i) {
        double norm = 0.0;
        for (const auto& c : basis.components(i)) {
            norm += c.coefficient * c.coefficient;
            CHECK(c.state.n1 % 2 == 0);
            CHECK(c.state.n2 % 2 == 0);
            const auto hit = basis.locate(c.state);
            REQUIRE(hit);
            CHECK(hit->first == i);
            CHECK(hit->second == doctest::Approx(c.coefficient));
        }
        CHECK(norm == doctest::Approx(1.0));
    }
    CHECK_FALSE(basis.locate({2, 2}));
    CHECK_FALSE(basis.locate({1, 2}));
}
