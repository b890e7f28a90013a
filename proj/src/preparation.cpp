#include "qrev/preparation.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <random>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "qrev/propagation.hpp"

namespace qrev {

namespace {

constexpr std::array<std::pair<PreparationKind, std::string_view>, 4> kKindNames{{
    {PreparationKind::coherent, "coherent"},
    {PreparationKind::random_superposition, "random"},
    {PreparationKind::ergodic, "ergodic"},
    {PreparationKind::eigenstate, "eigenstate"},
}};

void require_in_window(const QuantizedModel& model, std::size_t level) {
    if (level >= model.dim()) {
        throw std::invalid_argument("level index " + std::to_string(level) + " outside the window of " +
                                    std::to_string(model.dim()) + " levels");
    }
}

// e^{-|a|^2/2} a^n / sqrt(n!) for n = 0..n_max
std::vector<cplx> mode_amplitudes(cplx alpha, int n_max) {
    std::vector<cplx> c(static_cast<std::size_t>(n_max) + 1);
    c[0] = std::exp(-0.5 * std::norm(alpha));
    for (int n = 1; n <= n_max; ++n) {
        c[static_cast<std::size_t>(n)] = c[static_cast<std::size_t>(n) - 1] * alpha / std::sqrt(static_cast<double>(n));
    }
    return c;
}

void fill_moments(const QuantizedModel& model, PreparedState& out) {
    std::tie(out.report.energy_mean, out.report.energy_width) = energy_moments(model, out.psi);
}

}  // namespace

std::string_view to_string(PreparationKind kind) {
    for (const auto& [k, name] : kKindNames) {
        if (k == kind) return name;
    }
    return "ergodic";
}

PreparationKind preparation_kind_from_string(std::string_view text) {
    for (const auto& [k, name] : kKindNames) {
        if (name == text) return k;
    }
    throw ConfigError("unknown preparation kind '" + std::string(text) +
                      "' (expected coherent, random, ergodic or eigenstate)");
}

std::string_view to_string(Envelope envelope) { return envelope == Envelope::box ? "box" : "gaussian"; }

Envelope envelope_from_string(std::string_view text) {
    if (text == "gaussian") return Envelope::gaussian;
    if (text == "box") return Envelope::box;
    throw ConfigError("unknown envelope '" + std::string(text) + "' (expected gaussian or box)");
}

std::string_view to_string(ErgodicityPolicy policy) { return policy == ErgodicityPolicy::warn ? "warn" : "strict"; }

ErgodicityPolicy ergodicity_policy_from_string(std::string_view text) {
    if (text == "strict") return ErgodicityPolicy::strict;
    if (text == "warn") return ErgodicityPolicy::warn;
    throw ConfigError("unknown ergodicity policy '" + std::string(text) + "' (expected strict or warn)");
}

PhaseSpacePoint default_coherent_center(double energy, double x) {
    PhaseSpacePoint z{0.6, 0.4, 0.0, 0.0};
    const double kinetic = energy - classical_energy(z, x);
    if (kinetic < 0.0) throw std::invalid_argument("default_coherent_center: energy below the potential at Q = (0.6, 0.4)");
    z.p1 = z.p2 = std::sqrt(kinetic);
    return z;
}

double participation_ratio(const StateVector& psi) {
    const double s4 = psi.cwiseAbs2().squaredNorm();
    return s4 > 0.0 ? std::pow(psi.squaredNorm(), 2) / s4 : 0.0;
}

std::pair<double, double> energy_moments(const QuantizedModel& model, const StateVector& psi) {
    const Eigen::VectorXd p = psi.cwiseAbs2() / psi.squaredNorm();
    const Eigen::VectorXd e = model.window_energies();
    const double mean = p.dot(e);
    const double var = p.dot((e.array() - mean).square().matrix());
    return {mean, std::sqrt(std::max(var, 0.0))};
}

std::size_t draw_seed_level(const QuantizedModel& model, double energy, double band, std::uint64_t seed) {
    const Eigen::VectorXd e = model.window_energies();
    std::vector<std::size_t> candidates;
    for (Eigen::Index i = 0; i < e.size(); ++i) {
        if (std::abs(e[i] - energy) <= band) candidates.push_back(static_cast<std::size_t>(i));
    }
    if (candidates.empty()) return model.level_nearest(energy);
    std::mt19937_64 engine(seed);
    return candidates[engine() % candidates.size()];
}

std::pair<Eigen::VectorXcd, double> coherent_amplitudes(const OscillatorBasis& basis, const PhaseSpacePoint& center) {
    const double scale = 1.0 / std::sqrt(2.0 * basis.hbar);
    const int n_max = basis.n_max_per_mode;
    const auto c1 = mode_amplitudes(cplx(center.q1, center.p1) * scale, n_max);
    const auto c2 = mode_amplitudes(cplx(center.q2, center.p2) * scale, n_max);
    double kept = 0.0;
    for (int n1 = 0; n1 <= n_max; ++n1) {
        for (int n2 = 0; n1 + n2 <= n_max; ++n2) {
            kept += std::norm(c1[static_cast<std::size_t>(n1)] * c2[static_cast<std::size_t>(n2)]);
        }
    }
    Eigen::VectorXcd amp(static_cast<Eigen::Index>(basis.size()));
    for (std::size_t i = 0; i < basis.size(); ++i) {
        cplx v = 0.0;
        for (const auto& [s, coef] : basis.components(i)) {
            v += coef * c1[static_cast<std::size_t>(s.n1)] * c2[static_cast<std::size_t>(s.n2)];
        }
        amp[static_cast<Eigen::Index>(i)] = v;
    }
    return {amp, std::max(0.0, 1.0 - kept)};
}

PreparedState coherent_state(const QuantizedModel& model, const PhaseSpacePoint& center) {
    const WindowSpec& w = model.params.window;
    const double h_cl = classical_energy(center, model.params.x_ref);
    if (std::abs(h_cl - w.e_center) > w.half_width + 0.1 * w.e_center) {
        throw std::invalid_argument(fmt::format(
            "coherent_state: classical energy {:.4f} of the centre lies outside the window {} +- {} (+10%)", h_cl,
            w.e_center, w.half_width));
    }
    const OscillatorBasis basis = build_basis(model.params.hbar, model.params.e_cutoff, model.params.sector,
                                              model.params.basis_cap);
    if (basis.size() != static_cast<std::size_t>(model.eigenvectors.rows())) {
        throw std::invalid_argument("coherent_state: model carries no oscillator-basis eigenvectors");
    }
    PreparedState out;
    auto [amp, loss] = coherent_amplitudes(basis, center);
    out.report.truncation_loss = loss;
    if (out.report.truncation_loss > 1e-6) {
        throw std::invalid_argument(fmt::format(
            "coherent_state: {:.3e} of the norm lies beyond e_cutoff = {}; raise e_cutoff or move the centre",
            out.report.truncation_loss, model.params.e_cutoff));
    }
    out.report.sector_weight = amp.squaredNorm();
    if (!(out.report.sector_weight > 0.0)) throw std::invalid_argument("coherent_state: no weight in the symmetry sector");
    out.psi = model.eigenvectors.transpose() * amp;
    out.report.window_loss = std::max(0.0, 1.0 - out.psi.squaredNorm() / out.report.sector_weight);
    if (out.report.window_loss > 0.05) {
        throw std::invalid_argument(fmt::format(
            "coherent_state: {:.1f}% of the norm falls outside the energy window; widen the window",
            100.0 * out.report.window_loss));
    }
    out.psi /= out.psi.norm();
    fill_moments(model, out);
    return out;
}

PreparedState eigenstate_preparation(const QuantizedModel& model, std::size_t level_index) {
    require_in_window(model, level_index);
    PreparedState out;
    out.psi = StateVector::Zero(static_cast<Eigen::Index>(model.dim()));
    out.psi[static_cast<Eigen::Index>(level_index)] = 1.0;
    out.report.seed_level = level_index;
    fill_moments(model, out);
    return out;
}

PreparedState ergodic_preparation(const QuantizedModel& model, double epsilon_prep, std::size_t seed_level,
                                  double prep_time, const PreparationSpec& options,
                                  const linalg::Eigensystem* prep_eigen) {
    require_in_window(model, seed_level);
    if (epsilon_prep < 0.0) throw std::invalid_argument("ergodic_preparation: epsilon_prep must be >= 0");
    if (!(prep_time > 0.0)) throw std::invalid_argument("ergodic_preparation: prep_time must be positive");
    if (options.checkpoints < 2) throw std::invalid_argument("ergodic_preparation: need at least 2 checkpoints");
    warn_if_not_classically_small(epsilon_prep, "epsilon_prep");

    PreparedState out = eigenstate_preparation(model, seed_level);
    auto& rep = out.report;
    const std::size_t nc = options.checkpoints;
    for (std::size_t j = 0; j < nc; ++j) {
        rep.checkpoint_times.push_back(0.5 * prep_time * (1.0 + static_cast<double>(j) / static_cast<double>(nc - 1)));
    }
    if (epsilon_prep == 0.0) {
        // E is diagonal: only the seed's own phase changes
        out.psi[static_cast<Eigen::Index>(seed_level)] =
            std::polar(1.0, -model.window_energies()[static_cast<Eigen::Index>(seed_level)] * prep_time / model.hbar());
        rep.participation.assign(nc, 1.0);
        return out;
    }

    linalg::Eigensystem local;
    if (prep_eigen == nullptr) {
        local = window_eigensystem(model, epsilon_prep);
        prep_eigen = &local;
    }
    const StateVector seed = out.psi;
    out.psi = evolve(seed, *prep_eigen, prep_time, model.hbar());

    // PR(t) on a uniform grid over [0, prep_time] holding every checkpoint, then
    // its running time average
    const std::size_t stride = 2 * (nc - 1);
    const std::size_t steps = stride * std::max<std::size_t>(1, (options.pr_samples + stride - 1) / stride);
    const double dt = prep_time / static_cast<double>(steps);
    const Eigen::MatrixXd& v = prep_eigen->vectors;
    const Eigen::VectorXd c = v.transpose() * seed.real();
    Eigen::MatrixXd re(c.size(), static_cast<Eigen::Index>(steps + 1));
    Eigen::MatrixXd im(c.size(), static_cast<Eigen::Index>(steps + 1));
    for (std::size_t k = 0; k <= steps; ++k) {
        const double t = dt * static_cast<double>(k);
        for (Eigen::Index j = 0; j < c.size(); ++j) {
            const double phase = -prep_eigen->values[j] * t / model.hbar();
            re(j, static_cast<Eigen::Index>(k)) = c[j] * std::cos(phase);
            im(j, static_cast<Eigen::Index>(k)) = c[j] * std::sin(phase);
        }
    }
    const Eigen::MatrixXd pr = (v * re).array().square() + (v * im).array().square();
    std::vector<double> running(steps + 1, 1.0);
    double integral = 0.0;
    double previous = 1.0 / pr.col(0).array().square().sum();
    for (std::size_t k = 1; k <= steps; ++k) {
        const double current = 1.0 / pr.col(static_cast<Eigen::Index>(k)).array().square().sum();
        integral += 0.5 * (previous + current) * dt;
        running[k] = integral / (dt * static_cast<double>(k));
        previous = current;
    }
    std::vector<double> instantaneous;
    for (std::size_t j = 0; j < nc; ++j) {
        const std::size_t k = steps / 2 + j * (steps / stride);
        rep.participation.push_back(running[k]);
        instantaneous.push_back(1.0 / pr.col(static_cast<Eigen::Index>(k)).array().square().sum());
    }
    const auto [lo, hi] = std::minmax_element(rep.participation.begin(), rep.participation.end());
    rep.saturation_ratio = *hi / *lo;
    const auto [ilo, ihi] = std::minmax_element(instantaneous.begin(), instantaneous.end());
    rep.spread_ratio = *ihi / *ilo;
    rep.saturated = rep.saturation_ratio < options.saturation_threshold;
    if (!rep.saturated) {
        const std::string msg = fmt::format(
            "ergodic_preparation: time-averaged participation ratio still drifting over the second half of the "
            "preparation (max/min {:.3f} >= {}); increase prep_time beyond {}",
            rep.saturation_ratio, options.saturation_threshold, prep_time);
        if (options.ergodicity == ErgodicityPolicy::strict) throw NumericalError(msg);
        spdlog::warn("{}", msg);
    }
    fill_moments(model, out);
    return out;
}

PreparedState random_superposition(const QuantizedModel& model, double energy_width, double center_energy,
                                   std::uint64_t seed, Envelope envelope) {
    if (!(energy_width > 0.0)) throw std::invalid_argument("random_superposition: energy_width must be positive");
    const Eigen::VectorXd e = model.window_energies();
    // envelope on |psi_n|^2 whose standard deviation is energy_width
    Eigen::VectorXd weight(e.size());
    const double box_half = std::sqrt(3.0) * energy_width;
    for (Eigen::Index i = 0; i < e.size(); ++i) {
        const double d = e[i] - center_energy;
        weight[i] = envelope == Envelope::gaussian ? std::exp(-d * d / (2.0 * energy_width * energy_width))
                                                   : (std::abs(d) <= box_half ? 1.0 : 0.0);
    }
    const double support = weight.sum() * weight.sum() / weight.squaredNorm();
    if (!(support >= 10.0)) {
        throw std::invalid_argument(fmt::format(
            "random_superposition: envelope covers about {:.1f} levels, fewer than the minimum of 10", support));
    }
    std::mt19937_64 engine(seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    PreparedState out;
    out.psi.resize(e.size());
    for (Eigen::Index i = 0; i < e.size(); ++i) {
        const double re = normal(engine);
        const double im = normal(engine);
        out.psi[i] = cplx(re, im) * std::sqrt(weight[i]);
    }
    out.psi /= out.psi.norm();
    fill_moments(model, out);
    return out;
}

PreparedState prepare(const QuantizedModel& model, const PreparationSpec& spec, const linalg::Eigensystem* prep_eigen) {
    auto seed_level = [&] {
        return spec.level_index ? *spec.level_index
                                : draw_seed_level(model, spec.center_energy, spec.seed_band, spec.seed);
    };
    switch (spec.kind) {
        case PreparationKind::coherent:
            return coherent_state(model, spec.center ? *spec.center
                                                     : default_coherent_center(model.params.window.e_center,
                                                                               model.params.x_ref));
        case PreparationKind::eigenstate: return eigenstate_preparation(model, seed_level());
        case PreparationKind::random_superposition:
            return random_superposition(model, spec.energy_width, spec.center_energy, spec.seed, spec.envelope);
        case PreparationKind::ergodic:
            return ergodic_preparation(model, spec.epsilon_prep, seed_level(), spec.prep_time, spec, prep_eigen);
    }
    throw std::invalid_argument("prepare: unknown preparation kind");
}

void export_state(const StateVector& psi, const std::filesystem::path& path) {
    std::ofstream out(path);
    for (Eigen::Index i = 0; i < psi.size(); ++i) out << fmt::format("{:.17g} {:.17g}\n", psi[i].real(), psi[i].imag());
    if (!out) throw Error("cannot write state file " + path.string());
}

}  // namespace qrev
