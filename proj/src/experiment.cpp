#include "qrev/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

#include <spdlog/spdlog.h>

namespace qrev {

std::shared_ptr<const linalg::Eigensystem> EigenCache::get(double dx) {
    std::lock_guard lock(mutex_);
    auto& slot = systems_[dx];
    if (!slot) slot = std::make_shared<const linalg::Eigensystem>(window_eigensystem(model_, dx));
    return slot;
}

const EvolutionPair& EigenCache::pair(double epsilon_evol) {
    const auto h1 = get(epsilon_evol);
    const auto h2 = get(-epsilon_evol);
    std::lock_guard lock(mutex_);
    auto& slot = pairs_[epsilon_evol];
    if (!slot) {
        slot = std::make_unique<EvolutionPair>();
        slot->h1 = *h1;
        slot->h2 = *h2;
        slot->epsilon_evol = epsilon_evol;
        slot->hbar = model_.hbar();
    }
    return *slot;
}

ExperimentSpec experiment_spec(const Config& config, const SpectralDiagnostics* diagnostics) {
    double scale = 1.0;
    if (config.epsilon_units == EpsilonUnits::delta_x_c) {
        if (diagnostics == nullptr) throw ConfigError("epsilon_units = delta_x_c needs the model's spectral diagnostics");
        scale = diagnostics->delta_x_c;
    }
    ExperimentSpec spec;
    spec.preparation = config.preparation;
    spec.preparation.epsilon_prep *= scale;
    const auto& e = config.experiment;
    spec.epsilon_evol = e.epsilon_evol * scale;
    spec.period = e.period;
    spec.period_units = e.period_units;
    spec.samples = e.samples;
    spec.realizations = e.realizations;
    spec.seed = e.seed;
    spec.averaging = e.averaging;
    spec.refine = e.refine;
    spec.decay_fits = e.decay_fits;
    return spec;
}

nlohmann::json experiment_json(const ExperimentSpec& spec, const std::string& model_hash) {
    Config c;
    c.preparation = spec.preparation;
    const nlohmann::json prep = to_json(c)["preparation"];
    return {
        {"model_hash", model_hash},
        {"preparation", prep},
        {"epsilon_evol", spec.epsilon_evol},
        {"period", spec.period},
        {"period_units", to_string(spec.period_units)},
        {"samples", spec.samples},
        {"realizations", spec.realizations},
        {"seed", spec.seed},
        {"averaging", to_string(spec.averaging)},
        {"refine", spec.refine},
        {"decay_fits", spec.decay_fits},
    };
}

std::optional<double> survival_time(const QuantizedModel& model, const std::vector<StateVector>& states,
                                    const linalg::Eigensystem& h, double t_max) {
    constexpr std::size_t kSteps = 4096;
    std::vector<double> times(kSteps + 1);
    for (std::size_t k = 0; k <= kSteps; ++k) times[k] = t_max * static_cast<double>(k) / kSteps;
    std::vector<double> mean(times.size(), 0.0);
    for (const auto& psi : states) {
        const auto p = survival_trace(psi, h, model.hbar(), times);
        for (std::size_t k = 0; k < p.size(); ++k) mean[k] += p[k] / static_cast<double>(states.size());
    }
    const double level = std::exp(-1.0);
    for (std::size_t k = 1; k < mean.size(); ++k) {
        if (mean[k] < level) {
            const double f = (mean[k - 1] - level) / (mean[k - 1] - mean[k]);
            return times[k - 1] + f * (times[k] - times[k - 1]);
        }
    }
    return std::nullopt;
}

ExperimentOutcome run_experiment(EigenCache& cache, const ExperimentSpec& spec, const std::string& model_hash) {
    const QuantizedModel& model = cache.model();
    ExperimentOutcome out;
    out.spec = spec;
    out.hash = config_hash(experiment_json(spec, model_hash));
    out.model_kind = model.kind;
    out.hbar = model.hbar();
    out.lambda = lambda_for(spec.preparation.kind, spec.preparation.epsilon_prep, spec.epsilon_evol);
    if (spec.realizations == 0) throw std::invalid_argument("run_experiment: need at least one realization");
    warn_if_not_classically_small(spec.epsilon_evol, "epsilon_evol");

    std::shared_ptr<const linalg::Eigensystem> prep_eigen;
    if (spec.preparation.kind == PreparationKind::ergodic && spec.preparation.epsilon_prep > 0.0) {
        prep_eigen = cache.get(spec.preparation.epsilon_prep);
    }
    const EvolutionPair& pair = cache.pair(spec.epsilon_evol);

    std::vector<StateVector> states;
    for (std::size_t r = 0; r < spec.realizations; ++r) {
        PreparationSpec ps = spec.preparation;
        ps.seed = spec.seed + r;
        PreparedState prepared = prepare(model, ps, prep_eigen.get());
        RealizationRecord rec;
        rec.seed = ps.seed;
        rec.seed_level = prepared.report.seed_level;
        rec.saturated = prepared.report.saturated;
        rec.saturation_ratio = prepared.report.saturation_ratio;
        out.realizations.push_back(rec);
        states.push_back(std::move(prepared.psi));
    }

    out.period = spec.period;
    if (spec.period_units == PeriodUnits::survival_time) {
        const double heisenberg = 2.0 * std::numbers::pi * model.hbar() / std::max(model.mean_spacing, 1e-300);
        auto tau = survival_time(model, states, pair.h1, heisenberg);
        if (!tau) {
            spdlog::debug("survival never decays to 1/e; scaling the period by tau_cl = 1");
            tau = reference::tau_cl;
        }
        out.tau_sr = *tau;
        out.period = spec.period * *tau;
    }

    std::vector<CompensationResult> results;
    double pr_sum = 0.0;
    std::size_t echo_count = 0;
    for (std::size_t r = 0; r < states.size(); ++r) {
        const StateVector& psi = states[r];
        EchoTrace trace = echo_trace(psi, pair, out.period, spec.samples);
        auto& rec = out.realizations[r];
        rec.result = find_tr(trace, spec.refine);
        rec.echo = echo_condition(psi, pair, out.period);
        echo_count += rec.echo.satisfied ? 1 : 0;
        results.push_back(rec.result);
        pr_sum += participation_ratio(pair.h1.vectors.transpose() * psi);

        if (r == 0) {
            out.trace = trace;
            out.mean_trace = trace;
            out.survival.assign(trace.times.size(), 0.0);
            if (spec.decay_fits) out.fidelity.assign(trace.times.size(), 0.0);
        } else {
            for (std::size_t k = 0; k < trace.p.size(); ++k) out.mean_trace.p[k] += trace.p[k];
        }
        const auto sr = survival_trace(psi, pair.h1, model.hbar(), trace.times);
        for (std::size_t k = 0; k < sr.size(); ++k) out.survival[k] += sr[k];
        if (spec.decay_fits) {
            const auto le = fidelity_trace(psi, pair, trace.times);
            for (std::size_t k = 0; k < le.size(); ++k) out.fidelity[k] += le[k];
        }
    }
    const double n = static_cast<double>(states.size());
    for (double& v : out.mean_trace.p) v /= n;
    for (double& v : out.survival) v /= n;
    for (double& v : out.fidelity) v /= n;
    out.echo_fraction = static_cast<double>(echo_count) / n;

    if (spec.averaging == Averaging::trace) {
        out.aggregate = find_tr(out.mean_trace, spec.refine);
        out.aggregate.n_realizations = states.size();
    } else {
        out.aggregate = average_results(results);
    }

    if (spec.decay_fits) {
        const double saturation = n / pr_sum;
        auto try_fit = [&](const std::vector<double>& p) {
            try {
                return fit_gamma(out.trace.times, p, saturation).gamma;
            } catch (const std::exception&) {
                return std::numeric_limits<double>::quiet_NaN();
            }
        };
        out.gamma_sr = try_fit(out.survival);
        out.gamma_le = try_fit(out.fidelity);
    }
    return out;
}

std::vector<ExperimentSpec> sweep_cells(const Config& config, const SpectralDiagnostics* diagnostics) {
    const ExperimentSpec base = experiment_spec(config, diagnostics);
    const double scale = config.epsilon_units == EpsilonUnits::delta_x_c ? diagnostics->delta_x_c : 1.0;
    const auto& w = config.sweep;
    const std::vector<double> preps = w.epsilon_prep.empty() ? std::vector{config.preparation.epsilon_prep} : w.epsilon_prep;
    const std::vector<double> periods = w.period.empty() ? std::vector{config.experiment.period} : w.period;
    const bool by_lambda = !w.lambda.empty();
    const std::vector<double> evols =
        by_lambda ? w.lambda : (w.epsilon_evol.empty() ? std::vector{config.experiment.epsilon_evol} : w.epsilon_evol);

    std::vector<ExperimentSpec> cells;
    for (double ep : preps) {
        for (double ev : evols) {
            for (double t : periods) {
                ExperimentSpec s = base;
                s.preparation.epsilon_prep = ep * scale;
                s.epsilon_evol = (by_lambda ? ev * ep : ev) * scale;
                s.period = t;
                cells.push_back(s);
            }
        }
    }
    return cells;
}

SweepResult run_sweep(const QuantizedModel& model, const std::vector<ExperimentSpec>& cells, std::size_t workers,
                      const std::string& model_hash) {
    linalg::set_blas_threads(1);
    EigenCache cache(model);
    // every eigensystem up front, in cell order, so workers only read
    for (const auto& c : cells) {
        try {
            cache.pair(c.epsilon_evol);
            if (c.preparation.kind == PreparationKind::ergodic && c.preparation.epsilon_prep > 0.0) {
                cache.get(c.preparation.epsilon_prep);
            }
        } catch (const std::exception& e) {
            spdlog::warn("eigensystem for a sweep cell failed: {}", e.what());
        }
    }

    SweepResult result;
    result.outcomes.resize(cells.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            try {
                result.outcomes[i] = run_experiment(cache, cells[i], model_hash);
            } catch (const std::exception& e) {
                ExperimentOutcome& o = result.outcomes[i];
                o.spec = cells[i];
                o.hash = config_hash(experiment_json(cells[i], model_hash));
                o.model_kind = model.kind;
                o.hbar = model.hbar();
                o.lambda = lambda_for(cells[i].preparation.kind, cells[i].preparation.epsilon_prep, cells[i].epsilon_evol);
                o.error = dynamic_cast<const NumericalError*>(&e) ? std::string("numerical: ") + e.what()
                                                                   : std::string("error: ") + e.what();
            }
        }
    };
    workers = std::max<std::size_t>(1, std::min(workers, cells.size()));
    std::vector<std::thread> pool;
    for (std::size_t k = 1; k < workers; ++k) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();

    std::sort(result.outcomes.begin(), result.outcomes.end(),
              [](const ExperimentOutcome& a, const ExperimentOutcome& b) { return a.hash < b.hash; });
    for (const auto& o : result.outcomes) result.failures += o.error.empty() ? 0 : 1;
    return result;
}

std::vector<ScalingPoint> scaling_points(const std::vector<ExperimentOutcome>& outcomes) {
    std::vector<ScalingPoint> points;
    for (const auto& o : outcomes) {
        if (!o.error.empty()) continue;
        ScalingPoint p;
        p.lambda = o.lambda;
        p.t_r_over_T = o.aggregate.t_r_over_T;
        p.spread = o.aggregate.spread;
        p.epsilon_prep = o.spec.preparation.epsilon_prep;
        p.epsilon_evol = o.spec.epsilon_evol;
        p.period = o.period;
        p.kind = o.model_kind;
        p.n = o.aggregate.n_realizations;
        points.push_back(p);
    }
    return points;
}

}  // namespace qrev
