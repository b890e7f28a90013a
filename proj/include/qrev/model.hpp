#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qrev/basis.hpp"
#include "qrev/common.hpp"

namespace qrev {

/// Reference constants of the 2D well at hbar = 0.012. Kept for comparison only;
/// desk-scale runs recompute their own analogues.
namespace reference {
inline constexpr double hbar = 0.012;
inline constexpr double energy = 3.0;
inline constexpr double tau_cl = 1.0;
inline constexpr double spacing_coefficient = 4.3;         // Delta ~ 4.3 hbar^2
inline constexpr double parametric_coefficient = 3.8;      // dx_c ~ 3.8 hbar^(3/2)
inline constexpr double lambda_star = 1.3;
}  // namespace reference

/// How "near-diagonal" is read when computing sigma.
enum class SigmaConvention {
    first_off_diagonal,  // B_{n,n+1}
    energy_distance,     // all pairs with |E_n - E_m| < Delta
};

struct WindowSpec {
    double e_center = 3.0;
    double half_width = 1.0;
    /// Fraction of the basis dimension that must separate the window from the
    /// top of the (truncation-corrupted) spectrum.
    double edge_margin = 0.2;
    /// e_cutoff must reach this multiple of the window's upper energy.
    double cutoff_ratio = 1.4;
};

struct ModelParams {
    double hbar = 0.05;
    double e_cutoff = 6.0;
    double x_ref = 1.0;
    Sector sector = Sector::even_even_sym;
    WindowSpec window;
    std::size_t basis_cap = kDefaultBasisCap;
};

/// Reference Hamiltonian E = H(x_ref) in its own eigenbasis, plus the coupling
/// B = dH/dx = Q1^2 Q2^2 restricted to the retained window.
///
/// Immutable once built; safe to share read-only between threads.
struct QuantizedModel {
    ModelKind kind = ModelKind::physical_2dw;
    ModelParams params;
    std::size_t basis_dim = 0;
    Eigen::VectorXd energies;      // full spectrum of E, ascending
    IndexRange window;             // retained levels, indices into `energies`
    Eigen::MatrixXd b_matrix;      // window x window, symmetric
    Eigen::MatrixXd eigenvectors;  // basis_dim x window, oscillator-basis components
    double mean_spacing = 0.0;
    // ERMT provenance; zero / empty for the physical model
    std::uint64_t ermt_seed = 0;
    std::string parent_hash;

    [[nodiscard]] double hbar() const { return params.hbar; }
    [[nodiscard]] std::size_t dim() const { return window.size(); }
    [[nodiscard]] Eigen::VectorXd window_energies() const {
        return energies.segment(static_cast<Eigen::Index>(window.first), static_cast<Eigen::Index>(window.size()));
    }
    /// Index within the window of the level closest to `energy`.
    [[nodiscard]] std::size_t level_nearest(double energy) const;
};

/// Contiguous levels with |E_n - e_center| <= half_width. Throws when the range
/// is empty or reaches into the top `edge_margin` fraction of the spectrum.
IndexRange select_window(std::span<const double> energies, double e_center, double half_width,
                         double edge_margin = 0.2);

/// Diagonalise H(x_ref) in `basis`, keep the window and express B in it.
QuantizedModel diagonalize_reference(const OscillatorBasis& basis, double x_ref, const WindowSpec& window);

/// Convenience: basis + diagonalisation from one parameter set.
QuantizedModel build_model(const ModelParams& params);

struct BandBin {
    double omega_lo = 0.0;
    double omega_hi = 0.0;
    double mean_b2 = 0.0;
    std::size_t count = 0;
};

struct SpectralDiagnostics {
    double mean_spacing = 0.0;
    double sigma = 0.0;
    double delta_x_c = 0.0;
    std::vector<BandBin> band_profile;
    /// Energy distance beyond which every profile bin stays below
    /// `band_floor` times the profile maximum.
    double bandwidth = 0.0;
    /// Fraction of off-diagonal |B|^2 weight at |E_n - E_m| > bandwidth.
    double weight_outside_band = 0.0;
    double tau_cl_reference = reference::tau_cl;
    std::size_t levels = 0;
};

struct DiagnosticsOptions {
    SigmaConvention sigma_convention = SigmaConvention::first_off_diagonal;
    /// Band-profile bin width in units of hbar.
    double bin_width_hbar = 0.25;
    double band_floor = 1e-3;
    std::size_t min_levels = 50;
};

/// Delta, sigma, dx_c = Delta / sigma and the band profile of the window.
SpectralDiagnostics spectral_diagnostics(const QuantizedModel& model, const DiagnosticsOptions& options = {});

/// Mean nearest-neighbour spacing of the window (no statistical floor).
double window_mean_spacing(const QuantizedModel& model);

/// Classical 2D-well energy at a phase-space point.
struct PhaseSpacePoint {
    double q1 = 0.0;
    double q2 = 0.0;
    double p1 = 0.0;
    double p2 = 0.0;
};
double classical_energy(const PhaseSpacePoint& z, double x = 1.0);

/// Warns when a parameter displacement is comparable to x_ref, where the
/// linearisation H = E + dx B stops being classically small.
void warn_if_not_classically_small(double delta_x, std::string_view what);

}  // namespace qrev
