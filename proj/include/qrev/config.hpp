#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "qrev/model.hpp"
#include "qrev/preparation.hpp"

namespace qrev {

/// How epsilon_prep / epsilon_evol in a config are read.
enum class EpsilonUnits { absolute, delta_x_c };
/// How the experiment period is read: as a time, or as a multiple of the
/// 1/e decay time of the realization-averaged survival probability P_SR
/// (evolution under H1).
enum class PeriodUnits { absolute, survival_time };
/// t_r per realization then averaged, or t_r of the realization-averaged trace.
enum class Averaging { per_realization, trace };

struct ModelSection {
    ModelKind kind = ModelKind::physical_2dw;
    ModelParams params;
    std::string cache = "model.qrm";
    std::string ermt_cache = "ermt.qrm";
    std::uint64_t ermt_seed = 7;
    SigmaConvention sigma_convention = SigmaConvention::first_off_diagonal;
};

struct ExperimentSection {
    double epsilon_evol = 0.0;
    double period = 2.0;
    PeriodUnits period_units = PeriodUnits::survival_time;
    std::size_t samples = 512;
    std::size_t realizations = 1;
    std::uint64_t seed = 1;
    Averaging averaging = Averaging::per_realization;
    bool refine = true;
    bool decay_fits = true;
};

struct SweepSection {
    std::vector<double> epsilon_prep;
    std::vector<double> epsilon_evol;
    std::vector<double> lambda;  // alternative to epsilon_evol: eps_evol = lambda * eps_prep
    std::vector<double> period;
};

struct SurfaceSection {
    double t1_max = 0.0;  // 0: use the experiment period
    double t2_max = 0.0;
    std::size_t n_t1 = 129;
    std::size_t n_t2 = 129;
    std::size_t max_cells = 4'000'000;
};

struct AnalysisSection {
    double plateau_tolerance = 0.03;
    double regime_factor = 5.0;
    double lambda_tolerance = 1e-6;
};

struct Config {
    ModelSection model;
    PreparationSpec preparation;
    EpsilonUnits epsilon_units = EpsilonUnits::absolute;
    ExperimentSection experiment;
    SweepSection sweep;
    SurfaceSection surface;
    AnalysisSection analysis;
    std::string out_dir = "out";
    std::size_t workers = 0;  // 0: hardware concurrency
};

Config parse_config(const nlohmann::json& j);
/// Reads a JSON file; // and /* */ comments are allowed.
Config load_config(const std::filesystem::path& path);
nlohmann::json to_json(const Config& config);

/// Annotated default config, every key present.
std::string config_reference();

/// SHA-256 of the compact serialization of `j` (keys sorted) plus the code version.
std::string config_hash(const nlohmann::json& j);

std::string_view to_string(EpsilonUnits u);
std::string_view to_string(PeriodUnits u);
std::string_view to_string(Averaging a);
std::string_view to_string(SigmaConvention c);

}  // namespace qrev
