// qrev: build models, run time-reversal experiments and sweeps, write CSV.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "qrev/config.hpp"
#include "qrev/csv.hpp"
#include "qrev/ermt.hpp"
#include "qrev/experiment.hpp"
#include "qrev/model_io.hpp"

namespace fs = std::filesystem;
using namespace qrev;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitPartial = 4;

struct Options {
    std::string config_path;
    std::string out_dir;
    std::size_t workers = 0;
    std::uint64_t seed_offset = 0;
    std::string format = "csv";
    std::string input;
};

struct Session {
    Config config;
    fs::path out;
    std::string config_hash;
};

Session open_session(const Options& opt) {
    Session s;
    if (!opt.config_path.empty()) s.config = load_config(opt.config_path);
    if (!opt.out_dir.empty()) s.config.out_dir = opt.out_dir;
    if (opt.workers > 0) s.config.workers = opt.workers;
    s.config.experiment.seed += opt.seed_offset;
    if (opt.format != "csv") throw ConfigError("unsupported --format '" + opt.format + "' (only csv)");
    s.out = s.config.out_dir;
    fs::create_directories(s.out);
    nlohmann::json hashed = to_json(s.config);
    hashed.erase("out_dir");
    hashed.erase("workers");
    s.config_hash = qrev::config_hash(hashed);
    return s;
}

fs::path resolve(const Session& s, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : s.out / path;
}

QuantizedModel load_configured_model(const Session& s) {
    const auto& m = s.config.model;
    QuantizedModel model = load_model(resolve(s, m.kind == ModelKind::ermt ? m.ermt_cache : m.cache));
    if (model.kind != m.kind) {
        throw ConfigError(fmt::format("cache holds a {} model but the config asks for {}", to_string(model.kind),
                                      to_string(m.kind)));
    }
    return model;
}

std::optional<SpectralDiagnostics> try_diagnostics(const Session& s, const QuantizedModel& model) {
    DiagnosticsOptions o;
    o.sigma_convention = s.config.model.sigma_convention;
    try {
        return spectral_diagnostics(model, o);
    } catch (const std::invalid_argument& e) {
        if (s.config.epsilon_units == EpsilonUnits::delta_x_c) throw ConfigError(e.what());
        spdlog::warn("{}", e.what());
        return std::nullopt;
    }
}

CsvHeader base_header(const Session& s, const QuantizedModel& model, const std::string& model_hash) {
    return {{"config_hash", s.config_hash},
            {"code_version", std::string(kCodeVersion)},
            {"model", std::string(to_string(model.kind))},
            {"model_hash", model_hash},
            {"hbar", format_number(model.hbar())}};
}

CsvHeader experiment_header(const Session& s, const QuantizedModel& model, const std::string& model_hash,
                            const ExperimentOutcome& o) {
    CsvHeader h = base_header(s, model, model_hash);
    h.emplace_back("experiment_hash", o.hash);
    h.emplace_back("kind", std::string(to_string(o.spec.preparation.kind)));
    h.emplace_back("T", format_number(o.period));
    h.emplace_back("epsilon_prep", format_number(o.spec.preparation.epsilon_prep));
    h.emplace_back("epsilon_evol", format_number(o.spec.epsilon_evol));
    h.emplace_back("lambda", o.lambda.flag == LambdaFlag::numeric ? format_number(o.lambda.value)
                                                                   : std::string(lambda_label(o.lambda)));
    h.emplace_back("seed", std::to_string(o.spec.seed));
    h.emplace_back("realizations", std::to_string(o.spec.realizations));
    return h;
}

void print_diagnostics(const QuantizedModel& model, const std::optional<SpectralDiagnostics>& d) {
    std::cout << fmt::format("model {} hbar={} basis={} window=[{}, {}] levels={}\n", to_string(model.kind),
                             model.hbar(), model.basis_dim, model.window.first, model.window.last, model.dim());
    std::cout << fmt::format("Delta={:.6g} (Delta/hbar^2={:.4g})\n", model.mean_spacing,
                             model.mean_spacing / (model.hbar() * model.hbar()));
    if (d) {
        std::cout << fmt::format("sigma={:.6g} delta_x_c={:.6g} (delta_x_c/hbar^1.5={:.4g}) bandwidth={:.4g} "
                                 "weight_outside_band={:.3g}\n",
                                 d->sigma, d->delta_x_c, d->delta_x_c / std::pow(model.hbar(), 1.5), d->bandwidth,
                                 d->weight_outside_band);
    }
}

void save_diagnostics(const Session& s, const QuantizedModel& model, const std::string& hash,
                      const std::optional<SpectralDiagnostics>& d, const std::string& stem) {
    nlohmann::json j = {{"model", to_string(model.kind)},    {"model_hash", hash},
                        {"hbar", model.hbar()},               {"basis_dim", model.basis_dim},
                        {"window_first", model.window.first}, {"window_last", model.window.last},
                        {"levels", model.dim()},              {"mean_spacing", model.mean_spacing},
                        {"code_version", kCodeVersion}};
    if (d) {
        j["sigma"] = d->sigma;
        j["delta_x_c"] = d->delta_x_c;
        j["bandwidth"] = d->bandwidth;
        j["weight_outside_band"] = d->weight_outside_band;
        j["tau_cl_reference"] = d->tau_cl_reference;
        write_band_profile_csv(s.out / (stem + "_band_profile.csv"), base_header(s, model, hash), *d);
    }
    std::ofstream(s.out / (stem + "_diagnostics.json")) << j.dump(2) << '\n';
}

int cmd_build(const Options& opt) {
    const Session s = open_session(opt);
    const QuantizedModel model = build_model(s.config.model.params);
    const fs::path path = resolve(s, s.config.model.cache);
    save_model(model, path);
    const std::string hash = model_hash(model);
    const auto d = try_diagnostics(s, model);
    print_diagnostics(model, d);
    save_diagnostics(s, model, hash, d, "model");
    std::cout << fmt::format("cache {} sha256={}\n", path.string(), hash);
    return 0;
}

int cmd_ermt(const Options& opt) {
    const Session s = open_session(opt);
    const QuantizedModel parent = load_model(resolve(s, s.config.model.cache));
    const QuantizedModel model = randomize_signs(parent, s.config.model.ermt_seed);
    const fs::path path = resolve(s, s.config.model.ermt_cache);
    save_model(model, path);
    const std::string hash = model_hash(model);
    const auto d = try_diagnostics(s, model);
    print_diagnostics(model, d);
    save_diagnostics(s, model, hash, d, "ermt");
    std::cout << fmt::format("cache {} seed={} parent={} sha256={}\n", path.string(), model.ermt_seed,
                             model.parent_hash, hash);
    return 0;
}

int cmd_run(const Options& opt) {
    const Session s = open_session(opt);
    const QuantizedModel model = load_configured_model(s);
    const std::string hash = model_hash(model);
    const auto d = try_diagnostics(s, model);
    const ExperimentSpec spec = experiment_spec(s.config, d ? &*d : nullptr);
    EigenCache cache(model);
    const ExperimentOutcome o = run_experiment(cache, spec, hash);
    const CsvHeader h = experiment_header(s, model, hash, o);
    CsvHeader th = h;
    th.emplace_back("reversal_index", std::to_string(o.trace.reversal_index));
    write_trace_csv(s.out / "trace.csv", th, o.trace.times, o.trace.p);
    write_trace_csv(s.out / "trace_mean.csv", th, o.mean_trace.times, o.mean_trace.p);
    write_trace_csv(s.out / "survival.csv", h, o.trace.times, o.survival);
    if (!o.fidelity.empty()) write_trace_csv(s.out / "fidelity.csv", h, o.trace.times, o.fidelity);
    write_results_csv(s.out / "result.csv", h, std::span(&o, 1));
    write_realizations_csv(s.out / "realizations.csv", h, std::span(&o, 1));
    std::cout << fmt::format("T={:.6g} t_r={:.6g} t_r/T={:.6f} (std {:.3g}, n={}) p_max={:.6g} lambda={} "
                             "gamma_sr={:.4g} gamma_le={:.4g} echo_condition={:.2f}\n",
                             o.period, o.aggregate.t_r, o.aggregate.t_r_over_T, o.aggregate.spread,
                             o.aggregate.n_realizations, o.aggregate.p_max,
                             o.lambda.flag == LambdaFlag::numeric ? format_number(o.lambda.value)
                                                                  : std::string(lambda_label(o.lambda)),
                             o.gamma_sr, o.gamma_le, o.echo_fraction);
    return 0;
}

void report_scaling(const Session& s, const CsvHeader& header, const std::vector<ScalingPoint>& points) {
    std::set<double> distinct;
    for (const auto& p : points) distinct.insert(p.lambda.flag == LambdaFlag::numeric ? p.lambda.value : -1.0 - static_cast<int>(p.lambda.flag));
    if (distinct.size() < 2) {
        std::cout << "fewer than 2 distinct lambda values; no scaling curve written\n";
        return;
    }
    const ScalingCurve curve = scaling_curve(points, s.config.analysis.lambda_tolerance);
    write_scaling_csv(s.out / "scaling.csv", header, curve);
    for (const auto& b : curve.bins) {
        std::cout << fmt::format("lambda={:<8} f={:.4f} +- {:.4f} (n={})\n", format_number(b.lambda), b.f_mean,
                                 b.f_std, b.n);
    }
    std::cout << "monotone=" << (curve.monotone ? "yes" : "no") << '\n';
    try {
        const LambdaStar ls = estimate_lambda_star(curve, s.config.analysis.plateau_tolerance);
        std::cout << fmt::format("lambda_star={:.4f} +- {:.4f}\n", ls.value, ls.uncertainty);
    } catch (const NumericalError& e) {
        std::cout << "lambda_star unavailable: " << e.what() << '\n';
    }
}

int cmd_sweep(const Options& opt) {
    const Session s = open_session(opt);
    const QuantizedModel model = load_configured_model(s);
    const std::string hash = model_hash(model);
    const auto d = try_diagnostics(s, model);
    const auto cells = sweep_cells(s.config, d ? &*d : nullptr);
    const std::size_t workers =
        s.config.workers > 0 ? s.config.workers : std::max(1u, std::thread::hardware_concurrency());
    spdlog::info("sweep: {} cells on {} workers", cells.size(), workers);
    const SweepResult r = run_sweep(model, cells, workers, hash);
    CsvHeader h = base_header(s, model, hash);
    h.emplace_back("cells", std::to_string(cells.size()));
    h.emplace_back("failures", std::to_string(r.failures));
    write_results_csv(s.out / "results.csv", h, r.outcomes);
    write_realizations_csv(s.out / "realizations.csv", h, r.outcomes);
    report_scaling(s, h, scaling_points(r.outcomes));
    if (r.failures > 0) {
        std::cerr << fmt::format("{} of {} cells failed; see the error column of results.csv\n", r.failures,
                                 cells.size());
        return kExitPartial;
    }
    return 0;
}

int cmd_surface(const Options& opt) {
    Session s = open_session(opt);
    const QuantizedModel model = load_configured_model(s);
    const std::string hash = model_hash(model);
    const auto d = try_diagnostics(s, model);
    ExperimentSpec spec = experiment_spec(s.config, d ? &*d : nullptr);
    spec.realizations = 1;
    spec.decay_fits = false;
    EigenCache cache(model);
    const ExperimentOutcome o = run_experiment(cache, spec, hash);
    PreparationSpec ps = spec.preparation;
    ps.seed = spec.seed;
    const auto prep_eigen = ps.kind == PreparationKind::ergodic && ps.epsilon_prep > 0.0 ? cache.get(ps.epsilon_prep)
                                                                                         : nullptr;
    const StateVector psi = prepare(model, ps, prep_eigen.get()).psi;
    const EvolutionPair& pair = cache.pair(spec.epsilon_evol);

    const auto& sf = s.config.surface;
    auto grid = [](double t_max, std::size_t n) {
        if ((n - 1) % 2 == 0) return uniform_grid(t_max, n - 1);
        std::vector<double> g(n);
        for (std::size_t i = 0; i < n; ++i) g[i] = t_max * static_cast<double>(i) / static_cast<double>(n - 1);
        g.back() = t_max;
        return g;
    };
    const double T = o.period;
    const auto t1 = grid(sf.t1_max > 0.0 ? sf.t1_max : T, sf.n_t1);
    const auto t2 = grid(sf.t2_max > 0.0 ? sf.t2_max : T, sf.n_t2);
    const Eigen::MatrixXd p = surface(psi, pair, t1, t2, sf.max_cells);
    const double level = return_probability(psi, pair, 0.5 * T, 0.5 * T);
    const auto sr = survival_trace(psi, pair.h1, model.hbar(), t1);
    double crossing = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 1; i < sr.size(); ++i) {
        if ((sr[i - 1] - level) * (sr[i] - level) <= 0.0 && sr[i - 1] != sr[i]) {
            crossing = t1[i - 1] + (sr[i - 1] - level) / (sr[i - 1] - sr[i]) * (t1[i] - t1[i - 1]);
            break;
        }
    }
    CsvHeader h = experiment_header(s, model, hash, o);
    h.emplace_back("contour_level", format_number(level));
    h.emplace_back("contour_t1_axis", format_number(crossing));
    write_surface_csv(s.out / "surface.csv", h, t1, t2, p);
    write_trace_csv(s.out / "surface_survival.csv", h, t1, sr);
    std::cout << fmt::format("surface {}x{} T={:.6g} contour_level=P_LE(T/2)={:.6g} axis crossing t1={}\n", t1.size(),
                             t2.size(), T, level, format_number(crossing));
    return 0;
}

int cmd_analyze(const Options& opt) {
    const Session s = open_session(opt);
    const fs::path input = opt.input.empty() ? s.out / "results.csv" : fs::path(opt.input);
    const CsvTable table = read_csv(input);
    CsvHeader h = table.header;
    h.emplace_back("analyzed_from", input.filename().string());
    report_scaling(s, h, scaling_points_from_results(table));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generalized quantum time-reversal experiments on the 2D well and its ERMT counterpart"};
    app.require_subcommand(1);
    Options opt;
    auto common = [&](CLI::App* sub, bool needs_config) {
        auto* c = sub->add_option("--config", opt.config_path, "experiment config (JSON, comments allowed)");
        if (needs_config) c->required()->check(CLI::ExistingFile);
        sub->add_option("--out", opt.out_dir, "output directory (overrides out_dir)");
        sub->add_option("--workers", opt.workers, "worker threads for sweeps");
        sub->add_option("--seed-offset", opt.seed_offset, "added to every realization seed");
        sub->add_option("--format", opt.format, "output format")->check(CLI::IsMember({"csv"}));
    };
    common(app.add_subcommand("build", "diagonalize the reference Hamiltonian and write the model cache"), true);
    common(app.add_subcommand("ermt-derive", "sign-randomize a cached model into its ERMT counterpart"), true);
    common(app.add_subcommand("run", "one experiment: echo trace, survival, fidelity and result row"), true);
    common(app.add_subcommand("sweep", "grid of experiments, results and scaling CSVs"), true);
    common(app.add_subcommand("surface", "P(t1, t2) surface and its contour level P_LE(T/2)"), true);
    auto* analyze = app.add_subcommand("analyze", "scaling curve and lambda* from a results CSV");
    common(analyze, false);
    analyze->add_option("--input", opt.input, "results CSV (default: <out>/results.csv)");
    app.add_subcommand("config-reference", "print an annotated config with every default");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        const std::string name = app.get_subcommands().front()->get_name();
        if (name == "build") return cmd_build(opt);
        if (name == "ermt-derive") return cmd_ermt(opt);
        if (name == "run") return cmd_run(opt);
        if (name == "sweep") return cmd_sweep(opt);
        if (name == "surface") return cmd_surface(opt);
        if (name == "analyze") return cmd_analyze(opt);
        if (name == "config-reference") {
            std::cout << config_reference();
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kExitConfig;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
