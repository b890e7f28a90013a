#include "qrev/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <spdlog/spdlog.h>

#include "qrev/linalg.hpp"

namespace qrev {

std::size_t QuantizedModel::level_nearest(double energy) const {
    const Eigen::VectorXd e = window_energies();
    Eigen::Index best = 0;
    (e.array() - energy).abs().minCoeff(&best);
    return static_cast<std::size_t>(best);
}

IndexRange select_window(std::span<const double> energies, double e_center, double half_width,
                         double edge_margin) {
    if (!(half_width > 0.0)) throw std::invalid_argument("select_window: half_width must be positive");
    const std::size_t n = energies.size();
    std::size_t first = n;
    std::size_t last = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(energies[i] - e_center) <= half_width) {
            first = std::min(first, i);
            last = std::max(last, i);
        }
    }
    if (first == n) {
        std::ostringstream msg;
        msg << "select_window: no levels within " << half_width << " of E = " << e_center;
        if (n > 0) msg << " (spectrum spans [" << energies.front() << ", " << energies.back() << "])";
        throw NumericalError(msg.str());
    }
    const auto margin = static_cast<std::size_t>(std::ceil(edge_margin * static_cast<double>(n)));
    if (last + margin > n - 1 || last == n - 1) {
        std::ostringstream msg;
        msg << "select_window: window ends at level " << last << " of " << n
            << ", inside the top " << edge_margin * 100.0
            << "% of the spectrum corrupted by basis truncation; raise e_cutoff (to roughly "
            << std::ceil(10.0 * (e_center + half_width) / std::sqrt(1.0 - edge_margin) * 1.15) / 10.0
            << " or more)";
        throw NumericalError(msg.str());
    }
    return {first, last};
}

QuantizedModel diagonalize_reference(const OscillatorBasis& basis, double x_ref, const WindowSpec& window) {
    if (basis.size() == 0) throw std::invalid_argument("diagonalize_reference: empty basis");
    const double top = window.e_center + window.half_width;
    if (basis.e_cutoff < window.cutoff_ratio * top) {
        std::ostringstream msg;
        msg << "diagonalize_reference: e_cutoff = " << basis.e_cutoff << " leaves the window top " << top
            << " unconverged; raise e_cutoff to at least " << window.cutoff_ratio * top;
        throw NumericalError(msg.str());
    }
    const Eigen::SparseMatrix<double> h_sparse = hamiltonian_sparse(basis, x_ref);
    const Eigen::SparseMatrix<double> b_sparse = quartic_operator(basis);

    auto eig = linalg::symmetric_eigen_partial(Eigen::MatrixXd(h_sparse), [&](std::span<const double> e) {
        return select_window(e, window.e_center, window.half_width, window.edge_margin);
    });

    const double h_norm = eig.all_values.cwiseAbs().maxCoeff();
    const Eigen::MatrixXd residual = h_sparse * eig.vectors - eig.vectors * eig.all_values
                                         .segment(static_cast<Eigen::Index>(eig.range.first),
                                                  static_cast<Eigen::Index>(eig.range.size()))
                                         .asDiagonal();
    const double worst = residual.colwise().norm().maxCoeff();
    if (!(worst < 1e-9 * h_norm)) {
        std::ostringstream msg;
        msg << "diagonalize_reference: eigenpair residual " << worst << " exceeds 1e-9*|H| = " << 1e-9 * h_norm
            << " (basis " << basis.size() << " states, spectrum [" << eig.all_values.minCoeff() << ", "
            << eig.all_values.maxCoeff() << "])";
        throw NumericalError(msg.str());
    }

    QuantizedModel model;
    model.kind = ModelKind::physical_2dw;
    model.params.hbar = basis.hbar;
    model.params.e_cutoff = basis.e_cutoff;
    model.params.x_ref = x_ref;
    model.params.sector = basis.sector;
    model.params.window = window;
    model.basis_dim = basis.size();
    model.energies = std::move(eig.all_values);
    model.window = eig.range;
    model.eigenvectors = std::move(eig.vectors);
    const Eigen::MatrixXd bv = b_sparse * model.eigenvectors;
    Eigen::MatrixXd b = model.eigenvectors.transpose() * bv;
    model.b_matrix = 0.5 * (b + b.transpose());
    model.mean_spacing = window_mean_spacing(model);
    return model;
}

QuantizedModel build_model(const ModelParams& params) {
    const OscillatorBasis basis = build_basis(params.hbar, params.e_cutoff, params.sector, params.basis_cap);
    QuantizedModel model = diagonalize_reference(basis, params.x_ref, params.window);
    model.params.basis_cap = params.basis_cap;
    return model;
}

double window_mean_spacing(const QuantizedModel& model) {
    const std::size_t n = model.window.size();
    if (n < 2) return 0.0;
    const auto first = static_cast<Eigen::Index>(model.window.first);
    const auto last = static_cast<Eigen::Index>(model.window.last);
    return (model.energies[last] - model.energies[first]) / static_cast<double>(n - 1);
}

SpectralDiagnostics spectral_diagnostics(const QuantizedModel& model, const DiagnosticsOptions& options) {
    const std::size_t n = model.window.size();
    if (n < options.min_levels) {
        throw std::invalid_argument("spectral_diagnostics: window holds " + std::to_string(n) +
                                    " levels, below the statistical floor of " +
                                    std::to_string(options.min_levels));
    }
    const Eigen::VectorXd e = model.window_energies();
    const Eigen::MatrixXd& b = model.b_matrix;
    const auto ni = static_cast<Eigen::Index>(n);

    SpectralDiagnostics d;
    d.levels = n;
    d.mean_spacing = window_mean_spacing(model);

    double sum2 = 0.0;
    std::size_t count = 0;
    if (options.sigma_convention == SigmaConvention::energy_distance) {
        for (Eigen::Index i = 0; i < ni; ++i) {
            for (Eigen::Index j = i + 1; j < ni && e[j] - e[i] < d.mean_spacing; ++j) {
                sum2 += b(i, j) * b(i, j);
                ++count;
            }
        }
    }
    if (count == 0) {
        for (Eigen::Index i = 0; i + 1 < ni; ++i) sum2 += b(i, i + 1) * b(i, i + 1);
        count = n - 1;
    }
    d.sigma = std::sqrt(sum2 / static_cast<double>(count));
    d.delta_x_c = d.mean_spacing / d.sigma;

    const double width = options.bin_width_hbar * model.hbar();
    const double omega_max = e[ni - 1] - e[0];
    const auto nbins = static_cast<std::size_t>(std::floor(omega_max / width)) + 1;
    std::vector<double> sums(nbins, 0.0);
    std::vector<std::size_t> counts(nbins, 0);
    double total = 0.0;
    for (Eigen::Index i = 0; i < ni; ++i) {
        for (Eigen::Index j = i + 1; j < ni; ++j) {
            const double w2 = b(i, j) * b(i, j);
            const auto k = std::min(nbins - 1, static_cast<std::size_t>((e[j] - e[i]) / width));
            sums[k] += w2;
            ++counts[k];
            total += w2;
        }
    }
    double peak = 0.0;
    d.band_profile.reserve(nbins);
    for (std::size_t k = 0; k < nbins; ++k) {
        BandBin bin{k * width, (k + 1) * width, counts[k] ? sums[k] / static_cast<double>(counts[k]) : 0.0, counts[k]};
        peak = std::max(peak, bin.mean_b2);
        d.band_profile.push_back(bin);
    }
    std::size_t edge = 0;
    for (std::size_t k = 0; k < nbins; ++k) {
        if (d.band_profile[k].mean_b2 > options.band_floor * peak) edge = k;
    }
    d.bandwidth = d.band_profile[edge].omega_hi;
    double outside = 0.0;
    for (std::size_t k = edge + 1; k < nbins; ++k) outside += sums[k];
    d.weight_outside_band = total > 0.0 ? outside / total : 0.0;
    return d;
}

double classical_energy(const PhaseSpacePoint& z, double x) {
    return 0.5 * (z.p1 * z.p1 + z.p2 * z.p2 + z.q1 * z.q1 + z.q2 * z.q2) + x * z.q1 * z.q1 * z.q2 * z.q2;
}

void warn_if_not_classically_small(double delta_x, std::string_view what) {
    if (std::abs(delta_x) > 0.5) {
        spdlog::warn("{} = {} exceeds 0.5; the linear form H = E + dx*B assumes classically small dx", what,
                     delta_x);
    }
}

}  // namespace qrev
