#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qrev/linalg.hpp"
#include "qrev/propagation.hpp"

using namespace qrev;

namespace {

QuantizedModel toy_model(int n, unsigned seed) {
    QuantizedModel m;
    m.params.hbar = 0.1;
    m.energies = Eigen::VectorXd::LinSpaced(n, 1.0, 1.0 + 0.05 * (n - 1));
    m.window = {0, static_cast<std::size_t>(n - 1)};
    m.b_matrix = oracle::random_symmetric(n, seed, 0.1);
    m.mean_spacing = 0.05;
    return m;
}

}  // namespace

TEST_CASE("evolve: identity at t = 0 and stationary eigenstates") {
    const Eigen::MatrixXd h = oracle::random_symmetric(8, 1);
    const auto eig = linalg::symmetric_eigen(h);
    const StateVector psi = oracle::random_state(8, 2);
    CHECK((evolve(psi, eig, 0.0, 0.3) - psi).cwiseAbs().maxCoeff() < 1e-14);
    const StateVector v = eig.vectors.col(3).cast<cplx>();
    const StateVector w = evolve(v, eig, 2.7, 0.3);
    CHECK(std::abs(v.dot(w)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("evolve matches the matrix exponential") {
    const Eigen::MatrixXd h = oracle::random_symmetric(8, 3);
    const auto eig = linalg::symmetric_eigen(h);
    const StateVector psi = oracle::random_state(8, 4);
    for (double t : {0.1, 1.3, -2.2, 7.5}) {
        const StateVector a = evolve(psi, eig, t, 0.7);
        const StateVector b = oracle::propagator(h, t, 0.7) * psi;
        CHECK((a - b).cwiseAbs().maxCoeff() < 1e-8);
        CHECK(std::abs(a.norm() - 1.0) < 1e-12);
    }
}

TEST_CASE("evolve composes in time") {
    const Eigen::MatrixXd h = oracle::random_symmetric(20, 5);
    const auto eig = linalg::symmetric_eigen(h);
    const StateVector psi = oracle::random_state(20, 6);
    const StateVector ab = evolve(evolve(psi, eig, 0.8, 0.2), eig, 1.9, 0.2);
    CHECK((ab - evolve(psi, eig, 2.7, 0.2)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("return probability on a 12-level model") {
    const Eigen::MatrixXd e = Eigen::VectorXd::LinSpaced(12, 0.0, 1.1).asDiagonal();
    const Eigen::MatrixXd b = oracle::random_symmetric(12, 7, 0.2);
    const double eps = 0.3;
    const Eigen::MatrixXd h1 = e + eps * b;
    const Eigen::MatrixXd h2 = e - eps * b;
    const auto pair = make_evolution_pair(h1, h2, 0.25);
    const StateVector psi = oracle::random_state(12, 8);
    CHECK(return_probability(psi, pair, 0.0, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    for (auto [t1, t2] : {std::pair{0.3, 0.0}, {1.1, 0.9}, {2.0, 2.0}, {0.0, 1.7}, {4.2, 1.3}}) {
        CHECK(std::abs(return_probability(psi, pair, t1, t2) -
                       oracle::return_probability(psi, h1, h2, t1, t2, 0.25)) < 1e-8);
    }
    const std::vector<double> times{0.0, 0.4, 1.3, 2.6};
    const auto f = fidelity_trace(psi, pair, times);
    const auto s = survival_trace(psi, pair.h1, 0.25, times);
    for (std::size_t i = 0; i < times.size(); ++i) {
        CHECK(std::abs(f[i] - oracle::return_probability(psi, h1, h2, times[i], times[i], 0.25)) < 1e-8);
        CHECK(std::abs(s[i] - oracle::return_probability(psi, h1, h2, times[i], 0.0, 0.25)) < 1e-8);
    }
}

TEST_CASE("unperturbed evolution pair") {
    const QuantizedModel m = toy_model(30, 9);
    const auto pair = make_evolution_pair(m, 0.0);
    CHECK(pair.h1.values == m.window_energies());
    CHECK(pair.h1.vectors == Eigen::MatrixXd::Identity(30, 30));
    CHECK(pair.h2.values == pair.h1.values);
    const StateVector psi = oracle::random_state(30, 10);
    for (double t : {0.0, 0.5, 3.0, 40.0}) CHECK(return_probability(psi, pair, t, t) == doctest::Approx(1.0).epsilon(1e-12));
    const auto f = fidelity_trace(psi, pair, uniform_grid(4.0, 16));
    for (double v : f) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
    const auto trace = echo_trace(psi, pair, 4.0, 64);
    CHECK(std::abs(trace.p.back() - 1.0) < 1e-12);
}

TEST_CASE("factorisations reproduce the pair") {
    const QuantizedModel m = toy_model(25, 11);
    const auto pair = make_evolution_pair(m, 0.4);
    const Eigen::MatrixXd e = m.window_energies().asDiagonal();
    const Eigen::MatrixXd h1 = e + 0.4 * m.b_matrix;
    const Eigen::MatrixXd h2 = e - 0.4 * m.b_matrix;
    const auto rebuild = [](const linalg::Eigensystem& s) {
        return Eigen::MatrixXd(s.vectors * s.values.asDiagonal() * s.vectors.transpose());
    };
    CHECK((rebuild(pair.h1) - h1).norm() < 1e-10 * h1.norm());
    CHECK((rebuild(pair.h2) - h2).norm() < 1e-10 * h2.norm());
}

TEST_CASE("survival of an eigenstate is constant") {
    const Eigen::MatrixXd h = oracle::random_symmetric(10, 12);
    const auto eig = linalg::symmetric_eigen(h);
    const StateVector v = eig.vectors.col(4).cast<cplx>();
    for (double p : survival_trace(v, eig, 0.1, uniform_grid(5.0, 40))) CHECK(p == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("uniform grid holds T/2 and T exactly") {
    const double period = 0.7;
    const auto g = uniform_grid(period, 10);
    REQUIRE(g.size() == 11);
    CHECK(g.front() == 0.0);
    CHECK(g[5] == period / 2.0);
    CHECK(g.back() == period);
    CHECK_THROWS_AS(uniform_grid(1.0, 7), std::invalid_argument);
    CHECK_THROWS_AS(uniform_grid(-1.0, 8), std::invalid_argument);
}

TEST_CASE("echo trace structure") {
    const QuantizedModel m = toy_model(40, 13);
    const auto pair = make_evolution_pair(m, 0.2);
    const StateVector psi = oracle::random_state(40, 14);
    const double period = 6.0;
    const auto trace = echo_trace(psi, pair, period, 128);
    REQUIRE(trace.times.size() == 129);
    CHECK(trace.reversal_index == 64);
    CHECK(trace.times[64] == period / 2.0);
    CHECK(trace.times.back() == period);
    CHECK(trace.p[0] == doctest::Approx(1.0).epsilon(1e-12));
    for (double p : trace.p) {
        CHECK(p >= 0.0);
        CHECK(p <= 1.0 + 1e-12);
    }
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        const double t = trace.times[i];
        const double expected = i <= 64 ? return_probability(psi, pair, t, 0.0)
                                        : return_probability(psi, pair, period / 2.0, t - period / 2.0);
        CHECK(trace.p[i] == doctest::Approx(expected).epsilon(1e-10));
    }
    // continuity at the reversal
    const double eps = 1e-7;
    CHECK(std::abs(return_probability(psi, pair, period / 2.0, eps) - trace.p[64]) < 1e-5);
}

TEST_CASE("echo trace keeps the norm") {
    const QuantizedModel m = toy_model(50, 15);
    const auto pair = make_evolution_pair(m, 0.3);
    const StateVector psi = oracle::random_state(50, 16);
    StateVector phi = psi;
    for (int k = 0; k < 200; ++k) phi = evolve(phi, pair.h1, 0.05, pair.hbar);
    for (int k = 0; k < 200; ++k) phi = evolve(phi, pair.h2, -0.05, pair.hbar);
    CHECK(std::abs(phi.norm() - 1.0) < 1e-9);
}

TEST_CASE("surface rows and diagonal") {
    const QuantizedModel m = toy_model(30, 17);
    const auto pair = make_evolution_pair(m, 0.25);
    const StateVector psi = oracle::random_state(30, 18);
    const auto grid = uniform_grid(3.0, 24);
    const Eigen::MatrixXd s = surface(psi, pair, grid, grid);
    const auto sr = survival_trace(psi, pair.h1, pair.hbar, grid);
    const auto le = fidelity_trace(psi, pair, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        CHECK(std::abs(s(k, 0) - sr[i]) < 1e-12);
        CHECK(std::abs(s(k, k) - le[i]) < 1e-12);
    }
    const std::vector<double> bad{0.0, 2.0, 1.0};
    CHECK_THROWS_AS(surface(psi, pair, bad, grid), std::invalid_argument);
    CHECK_THROWS_AS(surface(psi, pair, grid, grid, 100), std::invalid_argument);
}

TEST_CASE("contour through (T/2, T/2) crosses the t1 axis where P_SR = P_LE(T/2)") {
    const QuantizedModel m = toy_model(40, 19);
    const auto pair = make_evolution_pair(m, 0.15);
    const StateVector psi = oracle::random_state(40, 20);
    const double half = 1.5;
    const double level = return_probability(psi, pair, half, half);
    // bisection on P_SR(t1) - level between 0 (P_SR = 1 > level) and the first grid point below the level
    const auto g = [&](double t) { return return_probability(psi, pair, t, 0.0) - level; };
    double hi = 0.0;
    for (double t = 0.0; t < 20.0; t += 0.01) {
        if (g(t) < 0) {
            hi = t;
            break;
        }
    }
    REQUIRE(hi > 0.0);
    double lo = hi - 0.01;
    for (int k = 0; k < 60; ++k) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) > 0 ? lo : hi) = mid;
    }
    const double root = 0.5 * (lo + hi);
    // the surface along t2 = 0 on a fine grid changes sign at the same root
    const auto grid = uniform_grid(2.0 * root, 2000);
    const std::vector<double> zero{0.0};
    const Eigen::MatrixXd row = surface(psi, pair, grid, zero);
    std::size_t cross = 0;
    while (cross + 1 < grid.size() && row(static_cast<Eigen::Index>(cross + 1), 0) >= level) ++cross;
    CHECK(std::abs(grid[cross] - root) <= 1.5 * grid[1]);
}
