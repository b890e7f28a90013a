#pragma once

#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "qrev/analysis.hpp"
#include "qrev/config.hpp"

namespace qrev {

/// Window eigensystems of E + dx B, shared between experiments. Entries are
/// immutable once inserted.
class EigenCache {
public:
    explicit EigenCache(const QuantizedModel& model) : model_(model) {}
    std::shared_ptr<const linalg::Eigensystem> get(double dx);
    const EvolutionPair& pair(double epsilon_evol);
    [[nodiscard]] const QuantizedModel& model() const { return model_; }

private:
    const QuantizedModel& model_;
    std::mutex mutex_;
    std::map<double, std::shared_ptr<const linalg::Eigensystem>> systems_;
    std::map<double, std::unique_ptr<EvolutionPair>> pairs_;
};

/// One experiment with every value resolved to absolute units.
struct ExperimentSpec {
    PreparationSpec preparation;
    double epsilon_evol = 0.0;
    double period = 1.0;
    PeriodUnits period_units = PeriodUnits::absolute;
    std::size_t samples = 512;
    std::size_t realizations = 1;
    std::uint64_t seed = 1;
    Averaging averaging = Averaging::per_realization;
    bool refine = true;
    bool decay_fits = true;
};

struct RealizationRecord {
    std::uint64_t seed = 0;
    std::optional<std::size_t> seed_level;
    CompensationResult result;
    EchoCondition echo;
    double saturation_ratio = 1.0;
    bool saturated = true;
};

struct ExperimentOutcome {
    ExperimentSpec spec;
    std::string hash;
    ModelKind model_kind = ModelKind::physical_2dw;
    double hbar = 0.0;
    Lambda lambda;
    double period = 0.0;     // absolute
    double tau_sr = 0.0;     // 1/e time of the averaged P_SR under H1, when measured
    std::vector<RealizationRecord> realizations;
    CompensationResult aggregate;
    double gamma_sr = std::numeric_limits<double>::quiet_NaN();
    double gamma_le = std::numeric_limits<double>::quiet_NaN();
    double echo_fraction = 0.0;  // realizations with P_SR(T/2) < P_LE(T/2)
    EchoTrace trace;             // first realization
    EchoTrace mean_trace;        // realization average
    std::vector<double> survival;  // averaged P_SR under H1 on trace.times
    std::vector<double> fidelity;  // averaged P_LE on trace.times (empty without decay fits)
    std::string error;
};

/// Resolves the experiment section of `config` (units, model-relative epsilons).
ExperimentSpec experiment_spec(const Config& config, const SpectralDiagnostics* diagnostics);

/// Identity of an experiment: preparation, evolution, sampling and the model hash.
nlohmann::json experiment_json(const ExperimentSpec& spec, const std::string& model_hash);

ExperimentOutcome run_experiment(EigenCache& cache, const ExperimentSpec& spec, const std::string& model_hash = {});

/// 1/e time of the realization-averaged survival of the prepared states
/// under `h`; nullopt when it never drops that far before t_max.
std::optional<double> survival_time(const QuantizedModel& model, const std::vector<StateVector>& states,
                                    const linalg::Eigensystem& h, double t_max);

/// Cartesian product of the sweep lists (scalar experiment values where a
/// list is empty).
std::vector<ExperimentSpec> sweep_cells(const Config& config, const SpectralDiagnostics* diagnostics);

struct SweepResult {
    std::vector<ExperimentOutcome> outcomes;  // sorted by hash
    std::size_t failures = 0;
};

/// Runs every cell on `workers` threads. Failed cells come back with their
/// error text; nothing else is shared between cells.
SweepResult run_sweep(const QuantizedModel& model, const std::vector<ExperimentSpec>& cells, std::size_t workers,
                      const std::string& model_hash = {});

std::vector<ScalingPoint> scaling_points(const std::vector<ExperimentOutcome>& outcomes);

}  // namespace qrev
