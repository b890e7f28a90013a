#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qrev/basis.hpp"
#include "qrev/model.hpp"
#include "qrev/preparation.hpp"
#include "qrev/propagation.hpp"

using namespace qrev;

namespace {

const QuantizedModel& desk_model() {
    static const QuantizedModel model = build_model(ModelParams{});
    return model;
}

void check_unit_in_window(const QuantizedModel& m, const StateVector& psi) {
    CHECK(psi.size() == static_cast<Eigen::Index>(m.dim()));
    CHECK(std::abs(psi.norm() - 1.0) < 1e-12);
}

}  // namespace

TEST_CASE("coherent amplitudes at the origin give the ground state") {
    const auto basis = build_basis(1.0, 6.0);
    const auto [amp, loss] = coherent_amplitudes(basis, {0, 0, 0, 0});
    CHECK(std::abs(amp[0] - cplx(1.0, 0.0)) < 1e-15);
    CHECK(amp.tail(amp.size() - 1).norm() < 1e-15);
    CHECK(loss < 1e-15);
}

TEST_CASE("coherent occupations are Poisson") {
    const auto basis = build_basis(1.0, 40.0);
    // alpha_1 = Q1 / sqrt(2 hbar) = sqrt(2)
    const auto [amp, loss] = coherent_amplitudes(basis, {2.0, 0.0, 0.0, 0.0});
    CHECK(loss < 1e-12);
    double factorial = 1.0;
    for (int n = 0; n < 15; ++n) {
        if (n > 0) factorial *= n;
        const auto hit = basis.locate({n, 0});
        REQUIRE(hit);
        const double expected = std::exp(-2.0) * std::pow(2.0, n) / factorial;
        CHECK(std::norm(amp[static_cast<Eigen::Index>(hit->first)]) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("coherent energy expectation follows the classical energy") {
    const double hbar = 0.05;
    const auto basis = build_basis(hbar, 6.0);
    const PhaseSpacePoint z = default_coherent_center(3.0);
    CHECK(classical_energy(z) == doctest::Approx(3.0).epsilon(1e-14));
    const auto [amp, loss] = coherent_amplitudes(basis, z);
    CHECK(loss < 1e-6);
    const Eigen::SparseMatrix<std::complex<double>> h = hamiltonian_sparse(basis, 1.0).cast<std::complex<double>>();
    const double energy = amp.dot(h * amp).real() / amp.squaredNorm();
    // normal ordering: each quadratic mode adds hbar/2, <Q^2> = q^2 + hbar/2
    const double exact = 0.5 * (z.p1 * z.p1 + z.q1 * z.q1 + z.p2 * z.p2 + z.q2 * z.q2) + hbar +
                         (z.q1 * z.q1 + hbar / 2) * (z.q2 * z.q2 + hbar / 2);
    CHECK(energy == doctest::Approx(exact).epsilon(1e-8));
    CHECK(std::abs(energy - classical_energy(z)) < 2.0 * hbar);
}

TEST_CASE("coherent state in the window") {
    const QuantizedModel& m = desk_model();
    const PreparedState s = coherent_state(m, default_coherent_center(3.0));
    check_unit_in_window(m, s.psi);
    CHECK(s.report.truncation_loss < 1e-6);
    CHECK(s.report.window_loss < 0.05);

    // energy distribution smoothed over half its width: one peak, near the quantum mean energy
    const Eigen::VectorXd e = m.window_energies();
    const double kernel = 0.5 * s.report.energy_width;
    std::vector<double> grid;
    std::vector<double> density;
    for (double x = e[0]; x <= e[e.size() - 1]; x += 0.002) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < e.size(); ++i) {
            const double u = (e[i] - x) / kernel;
            acc += std::norm(s.psi[i]) * std::exp(-0.5 * u * u);
        }
        grid.push_back(x);
        density.push_back(acc);
    }
    std::size_t peaks = 0;
    std::size_t mode = 0;
    for (std::size_t i = 1; i + 1 < density.size(); ++i) {
        if (density[i] > density[i - 1] && density[i] >= density[i + 1]) ++peaks;
        if (density[i] > density[mode]) mode = i;
    }
    CHECK(peaks == 1);
    CHECK(std::abs(grid[mode] - s.report.energy_mean) < 3.0 * m.mean_spacing);
    CHECK(std::abs(s.report.energy_mean - 3.0) < 2.0 * m.hbar());
}

TEST_CASE("coherent centre must sit on the window shell") {
    const QuantizedModel& m = desk_model();
    CHECK_THROWS_AS(coherent_state(m, {0.1, 0.1, 0.1, 0.1}), std::invalid_argument);
    CHECK_THROWS_AS(default_coherent_center(0.1), std::invalid_argument);
}

TEST_CASE("eigenstate preparation") {
    const QuantizedModel& m = desk_model();
    const std::size_t k = m.dim() / 2;
    const PreparedState s = eigenstate_preparation(m, k);
    check_unit_in_window(m, s.psi);
    for (Eigen::Index i = 0; i < s.psi.size(); ++i) CHECK(s.psi[i] == cplx(i == static_cast<Eigen::Index>(k) ? 1.0 : 0.0));
    const auto e = window_eigensystem(m, 0.0);
    for (double p : survival_trace(s.psi, e, m.hbar(), uniform_grid(50.0, 50))) CHECK(std::abs(p - 1.0) < 1e-14);
    CHECK_THROWS_AS(eigenstate_preparation(m, m.dim()), std::invalid_argument);
}

TEST_CASE("ergodic preparation") {
    const QuantizedModel& m = desk_model();
    const std::size_t seed = m.level_nearest(3.0);

    const PreparedState still = ergodic_preparation(m, 0.0, seed, 20.0);
    check_unit_in_window(m, still.psi);
    CHECK(std::norm(still.psi[static_cast<Eigen::Index>(seed)]) == doctest::Approx(1.0).epsilon(1e-12));

    PreparationSpec warn;
    warn.ergodicity = ErgodicityPolicy::warn;
    const PreparedState wide = ergodic_preparation(m, 0.4, seed, 20.0, warn);
    const PreparedState narrow = ergodic_preparation(m, 0.1, seed, 20.0, warn);
    check_unit_in_window(m, wide.psi);
    check_unit_in_window(m, narrow.psi);
    CHECK(wide.report.energy_width > narrow.report.energy_width);

    // participation ratio flattens out over the second half of the preparation
    CHECK(wide.report.checkpoint_times.size() == 10);
    CHECK(wide.report.checkpoint_times.front() == doctest::Approx(10.0));
    CHECK(wide.report.checkpoint_times.back() == doctest::Approx(20.0));
    CHECK(wide.report.saturated);
    CHECK(wide.report.saturation_ratio < 1.2);

    const PreparedState again = ergodic_preparation(m, 0.4, seed, 20.0, warn);
    CHECK(again.psi == wide.psi);

    PreparationSpec strict;
    strict.saturation_threshold = 1.0 + 1e-9;
    CHECK_THROWS_AS(ergodic_preparation(m, 0.4, seed, 20.0, strict), NumericalError);
    CHECK_THROWS_AS(ergodic_preparation(m, -0.1, seed, 20.0), std::invalid_argument);
}

TEST_CASE("random superposition") {
    const QuantizedModel& m = desk_model();
    const PreparedState a = random_superposition(m, 0.3, 3.0, 42);
    const PreparedState b = random_superposition(m, 0.3, 3.0, 42);
    const PreparedState c = random_superposition(m, 0.3, 3.0, 43);
    check_unit_in_window(m, a.psi);
    CHECK(a.psi == b.psi);
    CHECK(a.psi != c.psi);

    // target widths spanning well over 30 levels
    for (double width : {0.35, 0.5}) {
        REQUIRE(width / m.mean_spacing >= 30.0);
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const PreparedState s = random_superposition(m, width, 3.0, seed);
            CHECK(s.report.energy_width == doctest::Approx(width).epsilon(0.15));
        }
    }
    CHECK_THROWS_AS(random_superposition(m, 0.02, 3.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(random_superposition(m, 0.0, 3.0, 1), std::invalid_argument);
}

TEST_CASE("random superposition flat limit") {
    const QuantizedModel& m = desk_model();
    const auto n = static_cast<Eigen::Index>(m.dim());
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
    const int draws = 400;
    for (int k = 0; k < draws; ++k) {
        mean += random_superposition(m, 1e4, 3.0, static_cast<std::uint64_t>(k)).psi.cwiseAbs2();
    }
    mean /= draws;
    const double uniform = 1.0 / static_cast<double>(n);
    CHECK(mean.sum() == doctest::Approx(1.0).epsilon(1e-12));
    // each entry averages 400 roughly exponential draws: 5 sigma is 25%
    CHECK(((mean.array() - uniform).abs() / uniform).maxCoeff() < 0.25);
}

TEST_CASE("box envelope matches the requested width") {
    const QuantizedModel& m = desk_model();
    double acc = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        acc += random_superposition(m, 0.3, 3.0, seed, Envelope::box).report.energy_width;
    }
    CHECK(acc / 20.0 == doctest::Approx(0.3).epsilon(0.1));
}

TEST_CASE("prepare dispatches on the kind and draws seed levels") {
    const QuantizedModel& m = desk_model();
    PreparationSpec spec;
    spec.kind = PreparationKind::eigenstate;
    spec.seed = 5;
    const PreparedState s = prepare(m, spec);
    REQUIRE(s.report.seed_level);
    CHECK(std::abs(m.window_energies()[static_cast<Eigen::Index>(*s.report.seed_level)] - 3.0) <= 0.1);
    CHECK(*s.report.seed_level == draw_seed_level(m, 3.0, 0.1, 5));
    spec.level_index = 3;
    CHECK(*prepare(m, spec).report.seed_level == 3);

    CHECK(preparation_kind_from_string("random") == PreparationKind::random_superposition);
    CHECK(to_string(PreparationKind::ergodic) == "ergodic");
    CHECK_THROWS_AS(preparation_kind_from_string("thermal"), ConfigError);
    CHECK_THROWS_AS(envelope_from_string("lorentz"), ConfigError);
}

TEST_CASE("participation ratio") {
    StateVector v = StateVector::Zero(4);
    v[1] = 1.0;
    CHECK(participation_ratio(v) == doctest::Approx(1.0));
    v.setConstant(0.5);
    CHECK(participation_ratio(v) == doctest::Approx(4.0));
}
