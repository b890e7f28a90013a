#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "qrev/linalg.hpp"
#include "qrev/model.hpp"

namespace qrev {

enum class PreparationKind { coherent, random_superposition, ergodic, eigenstate };
enum class Envelope { gaussian, box };
/// What happens when an ergodic preparation fails the saturation test.
enum class ErgodicityPolicy { strict, warn };

std::string_view to_string(PreparationKind kind);
PreparationKind preparation_kind_from_string(std::string_view text);
std::string_view to_string(Envelope envelope);
Envelope envelope_from_string(std::string_view text);
std::string_view to_string(ErgodicityPolicy policy);
ErgodicityPolicy ergodicity_policy_from_string(std::string_view text);

/// Point on the shell H_cl = energy with Q = (0.6, 0.4) and P1 = P2.
PhaseSpacePoint default_coherent_center(double energy, double x = 1.0);

struct PreparationSpec {
    PreparationKind kind = PreparationKind::ergodic;
    double epsilon_prep = 0.0;
    std::optional<PhaseSpacePoint> center;  // coherent; default_coherent_center when empty
    double energy_width = 0.1;              // random superposition: target energy std
    Envelope envelope = Envelope::gaussian;
    double center_energy = 3.0;             // random superposition centre, seed-level band centre
    std::uint64_t seed = 0;
    double prep_time = 20.0;
    std::optional<std::size_t> level_index;  // window index of the seed eigenstate; drawn from `seed` when empty
    double seed_band = 0.1;                  // seed levels are drawn from |E_n - center_energy| <= seed_band
    ErgodicityPolicy ergodicity = ErgodicityPolicy::strict;
    double saturation_threshold = 1.2;
    std::size_t checkpoints = 10;
    std::size_t pr_samples = 128;  // PR(t) samples over [0, prep_time] for the running average
};

struct PreparationReport {
    std::optional<std::size_t> seed_level;
    double truncation_loss = 0.0;  // coherent: product-basis norm beyond e_cutoff
    double sector_weight = 1.0;    // coherent: norm retained by the symmetry sector
    double window_loss = 0.0;      // coherent: sector norm outside the window
    std::vector<double> checkpoint_times;
    std::vector<double> participation;  // running time average of PR(t) at each checkpoint
    double saturation_ratio = 1.0;      // max / min of `participation`
    double spread_ratio = 1.0;          // max / min of the instantaneous PR at the checkpoints
    bool saturated = true;
    double energy_mean = 0.0;
    double energy_width = 0.0;
};

struct PreparedState {
    StateVector psi;
    PreparationReport report;
};

double participation_ratio(const StateVector& psi);

/// <E> and the energy standard deviation of |psi_n|^2 over the window levels.
std::pair<double, double> energy_moments(const QuantizedModel& model, const StateVector& psi);

/// Window index of a level drawn uniformly from those within `band` of
/// `energy` (the nearest level when none is).
std::size_t draw_seed_level(const QuantizedModel& model, double energy, double band, std::uint64_t seed);

/// Coherent state e^{-|a_i|^2/2} a_i^n / sqrt(n!) per mode, a_i = (Q_i + i P_i) / sqrt(2 hbar),
/// projected on `basis` (symmetrised where the sector asks for it). The second
/// member is the product-basis norm lost to the truncation.
std::pair<Eigen::VectorXcd, double> coherent_amplitudes(const OscillatorBasis& basis, const PhaseSpacePoint& center);

PreparedState coherent_state(const QuantizedModel& model, const PhaseSpacePoint& center);

PreparedState eigenstate_preparation(const QuantizedModel& model, std::size_t level_index);

/// Evolve eigenstate `seed_level` under H_prep = E + epsilon_prep B for
/// prep_time. `prep_eigen` may carry a precomputed window_eigensystem of H_prep.
PreparedState ergodic_preparation(const QuantizedModel& model, double epsilon_prep, std::size_t seed_level,
                                  double prep_time, const PreparationSpec& options = {},
                                  const linalg::Eigensystem* prep_eigen = nullptr);

PreparedState random_superposition(const QuantizedModel& model, double energy_width, double center_energy,
                                   std::uint64_t seed, Envelope envelope = Envelope::gaussian);

PreparedState prepare(const QuantizedModel& model, const PreparationSpec& spec,
                      const linalg::Eigensystem* prep_eigen = nullptr);

/// One "re im" line per window amplitude.
void export_state(const StateVector& psi, const std::filesystem::path& path);

}  // namespace qrev
