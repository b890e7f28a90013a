#include "qrev/config.hpp"

#include <fstream>
#include <iterator>
#include <set>

#include <fmt/format.h>

#include "qrev/hash.hpp"

namespace qrev {

using nlohmann::json;

namespace {

// Guards one JSON object: typed optional reads plus a check for keys nobody asked for.
class Section {
public:
    Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
        if (!j_.is_object()) throw ConfigError("config section '" + name_ + "' must be an object");
    }

    template <typename T>
    void read(const char* key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key) || j_.at(key).is_null()) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(fmt::format("config key {}.{}: {}", name_, key, e.what()));
        }
    }

    template <typename T, typename Fn>
    void read_enum(const char* key, T& out, Fn from_string) {
        std::string text;
        read(key, text);
        if (!text.empty()) out = from_string(text);
    }

    [[nodiscard]] const json* child(const char* key) {
        seen_.insert(key);
        if (!j_.contains(key) || j_.at(key).is_null()) return nullptr;
        return &j_.at(key);
    }

    void finish() const {
        for (const auto& [k, v] : j_.items()) {
            if (!seen_.contains(k)) throw ConfigError("unknown config key '" + name_ + "." + k + "'");
        }
    }

private:
    const json& j_;
    std::string name_;
    std::set<std::string, std::less<>> seen_;
};

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError("invalid config: " + what);
}

SigmaConvention sigma_from_string(std::string_view s) {
    if (s == "first_off_diagonal") return SigmaConvention::first_off_diagonal;
    if (s == "energy_distance") return SigmaConvention::energy_distance;
    throw ConfigError("unknown sigma_convention '" + std::string(s) + "'");
}

EpsilonUnits epsilon_units_from_string(std::string_view s) {
    if (s == "absolute") return EpsilonUnits::absolute;
    if (s == "delta_x_c") return EpsilonUnits::delta_x_c;
    throw ConfigError("unknown epsilon_units '" + std::string(s) + "' (expected absolute or delta_x_c)");
}

PeriodUnits period_units_from_string(std::string_view s) {
    if (s == "absolute") return PeriodUnits::absolute;
    if (s == "survival_time") return PeriodUnits::survival_time;
    throw ConfigError("unknown period_units '" + std::string(s) + "' (expected absolute or survival_time)");
}

Averaging averaging_from_string(std::string_view s) {
    if (s == "per_realization") return Averaging::per_realization;
    if (s == "trace") return Averaging::trace;
    throw ConfigError("unknown averaging '" + std::string(s) + "' (expected per_realization or trace)");
}

void parse_model(const json& j, ModelSection& m) {
    Section s(j, "model");
    s.read_enum("kind", m.kind, model_kind_from_string);
    s.read("hbar", m.params.hbar);
    s.read("e_cutoff", m.params.e_cutoff);
    s.read("x_ref", m.params.x_ref);
    s.read_enum("sector", m.params.sector, sector_from_string);
    s.read("basis_cap", m.params.basis_cap);
    s.read("cache", m.cache);
    s.read("ermt_cache", m.ermt_cache);
    s.read("ermt_seed", m.ermt_seed);
    s.read_enum("sigma_convention", m.sigma_convention, sigma_from_string);
    if (const json* w = s.child("window")) {
        Section ws(*w, "model.window");
        ws.read("center", m.params.window.e_center);
        ws.read("half_width", m.params.window.half_width);
        ws.read("edge_margin", m.params.window.edge_margin);
        ws.read("cutoff_ratio", m.params.window.cutoff_ratio);
        ws.finish();
    }
    s.finish();
    require(m.params.hbar > 0.0, "model.hbar must be positive");
    require(m.params.e_cutoff > m.params.hbar, "model.e_cutoff must exceed hbar");
    require(m.params.window.half_width > 0.0, "model.window.half_width must be positive");
    require(m.params.window.edge_margin >= 0.0 && m.params.window.edge_margin < 1.0,
            "model.window.edge_margin must lie in [0, 1)");
    require(m.params.window.cutoff_ratio >= 1.0, "model.window.cutoff_ratio must be >= 1");
}

void parse_preparation(const json& j, PreparationSpec& p) {
    Section s(j, "preparation");
    s.read_enum("kind", p.kind, preparation_kind_from_string);
    s.read("epsilon_prep", p.epsilon_prep);
    s.read("energy_width", p.energy_width);
    s.read_enum("envelope", p.envelope, envelope_from_string);
    s.read("center_energy", p.center_energy);
    s.read("prep_time", p.prep_time);
    s.read("seed_band", p.seed_band);
    s.read_enum("ergodicity", p.ergodicity, ergodicity_policy_from_string);
    s.read("saturation_threshold", p.saturation_threshold);
    s.read("checkpoints", p.checkpoints);
    s.read("pr_samples", p.pr_samples);
    if (const json* li = s.child("level_index")) {
        try {
            p.level_index = li->get<std::size_t>();
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config key preparation.level_index: ") + e.what());
        }
    }
    if (const json* c = s.child("center")) {
        std::vector<double> v;
        try {
            v = c->get<std::vector<double>>();
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config key preparation.center: ") + e.what());
        }
        require(v.size() == 4, "preparation.center must be [q1, q2, p1, p2]");
        p.center = PhaseSpacePoint{v[0], v[1], v[2], v[3]};
    }
    s.finish();
    require(p.epsilon_prep >= 0.0, "preparation.epsilon_prep must be >= 0");
    require(p.energy_width > 0.0, "preparation.energy_width must be positive");
    require(p.prep_time > 0.0, "preparation.prep_time must be positive");
    require(p.checkpoints >= 2, "preparation.checkpoints must be >= 2");
}

void parse_experiment(const json& j, ExperimentSection& e) {
    Section s(j, "experiment");
    s.read("epsilon_evol", e.epsilon_evol);
    s.read("period", e.period);
    s.read_enum("period_units", e.period_units, period_units_from_string);
    s.read("samples", e.samples);
    s.read("realizations", e.realizations);
    s.read("seed", e.seed);
    s.read_enum("averaging", e.averaging, averaging_from_string);
    s.read("refine", e.refine);
    s.read("decay_fits", e.decay_fits);
    s.finish();
    require(e.epsilon_evol >= 0.0, "experiment.epsilon_evol must be >= 0");
    require(e.period > 0.0, "experiment.period must be positive");
    require(e.samples >= 4 && e.samples % 2 == 0, "experiment.samples must be even and >= 4");
    require(e.realizations >= 1, "experiment.realizations must be >= 1");
}

void parse_sweep(const json& j, SweepSection& w) {
    Section s(j, "sweep");
    s.read("epsilon_prep", w.epsilon_prep);
    s.read("epsilon_evol", w.epsilon_evol);
    s.read("lambda", w.lambda);
    s.read("period", w.period);
    s.finish();
    require(w.epsilon_evol.empty() || w.lambda.empty(), "sweep.epsilon_evol and sweep.lambda are mutually exclusive");
    for (double v : w.epsilon_prep) require(v >= 0.0, "sweep.epsilon_prep entries must be >= 0");
    for (double v : w.epsilon_evol) require(v >= 0.0, "sweep.epsilon_evol entries must be >= 0");
    for (double v : w.lambda) require(v >= 0.0, "sweep.lambda entries must be >= 0");
    for (double v : w.period) require(v > 0.0, "sweep.period entries must be positive");
}

void parse_surface(const json& j, SurfaceSection& f) {
    Section s(j, "surface");
    s.read("t1_max", f.t1_max);
    s.read("t2_max", f.t2_max);
    s.read("n_t1", f.n_t1);
    s.read("n_t2", f.n_t2);
    s.read("max_cells", f.max_cells);
    s.finish();
    require(f.n_t1 >= 2 && f.n_t2 >= 2, "surface grids need at least 2 points");
    require(f.t1_max >= 0.0 && f.t2_max >= 0.0, "surface extents must be >= 0");
}

void parse_analysis(const json& j, AnalysisSection& a) {
    Section s(j, "analysis");
    s.read("plateau_tolerance", a.plateau_tolerance);
    s.read("regime_factor", a.regime_factor);
    s.read("lambda_tolerance", a.lambda_tolerance);
    s.finish();
    require(a.plateau_tolerance > 0.0, "analysis.plateau_tolerance must be positive");
    require(a.regime_factor > 0.0, "analysis.regime_factor must be positive");
}

}  // namespace

std::string_view to_string(EpsilonUnits u) { return u == EpsilonUnits::delta_x_c ? "delta_x_c" : "absolute"; }
std::string_view to_string(PeriodUnits u) { return u == PeriodUnits::survival_time ? "survival_time" : "absolute"; }
std::string_view to_string(Averaging a) { return a == Averaging::trace ? "trace" : "per_realization"; }
std::string_view to_string(SigmaConvention c) {
    return c == SigmaConvention::energy_distance ? "energy_distance" : "first_off_diagonal";
}

Config parse_config(const json& j) {
    Config c;
    Section s(j, "<root>");
    if (const json* m = s.child("model")) parse_model(*m, c.model);
    if (const json* p = s.child("preparation")) parse_preparation(*p, c.preparation);
    s.read_enum("epsilon_units", c.epsilon_units, epsilon_units_from_string);
    if (const json* e = s.child("experiment")) parse_experiment(*e, c.experiment);
    if (const json* w = s.child("sweep")) parse_sweep(*w, c.sweep);
    if (const json* f = s.child("surface")) parse_surface(*f, c.surface);
    if (const json* a = s.child("analysis")) parse_analysis(*a, c.analysis);
    s.read("out_dir", c.out_dir);
    s.read("workers", c.workers);
    s.finish();
    return c;
}

Config load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    json j;
    try {
        j = json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
    return parse_config(j);
}

json to_json(const Config& c) {
    const auto& m = c.model;
    const auto& p = c.preparation;
    const auto& e = c.experiment;
    json j;
    j["model"] = {
        {"kind", to_string(m.kind)},
        {"hbar", m.params.hbar},
        {"e_cutoff", m.params.e_cutoff},
        {"x_ref", m.params.x_ref},
        {"sector", to_string(m.params.sector)},
        {"window",
         {{"center", m.params.window.e_center},
          {"half_width", m.params.window.half_width},
          {"edge_margin", m.params.window.edge_margin},
          {"cutoff_ratio", m.params.window.cutoff_ratio}}},
        {"basis_cap", m.params.basis_cap},
        {"cache", m.cache},
        {"ermt_cache", m.ermt_cache},
        {"ermt_seed", m.ermt_seed},
        {"sigma_convention", to_string(m.sigma_convention)},
    };
    j["preparation"] = {
        {"kind", to_string(p.kind)},
        {"epsilon_prep", p.epsilon_prep},
        {"center", p.center ? json{p.center->q1, p.center->q2, p.center->p1, p.center->p2} : json(nullptr)},
        {"energy_width", p.energy_width},
        {"envelope", to_string(p.envelope)},
        {"center_energy", p.center_energy},
        {"prep_time", p.prep_time},
        {"level_index", p.level_index ? json(*p.level_index) : json(nullptr)},
        {"seed_band", p.seed_band},
        {"ergodicity", to_string(p.ergodicity)},
        {"saturation_threshold", p.saturation_threshold},
        {"checkpoints", p.checkpoints},
        {"pr_samples", p.pr_samples},
    };
    j["epsilon_units"] = to_string(c.epsilon_units);
    j["experiment"] = {
        {"epsilon_evol", e.epsilon_evol},
        {"period", e.period},
        {"period_units", to_string(e.period_units)},
        {"samples", e.samples},
        {"realizations", e.realizations},
        {"seed", e.seed},
        {"averaging", to_string(e.averaging)},
        {"refine", e.refine},
        {"decay_fits", e.decay_fits},
    };
    j["sweep"] = {{"epsilon_prep", c.sweep.epsilon_prep},
                  {"epsilon_evol", c.sweep.epsilon_evol},
                  {"lambda", c.sweep.lambda},
                  {"period", c.sweep.period}};
    j["surface"] = {{"t1_max", c.surface.t1_max},
                    {"t2_max", c.surface.t2_max},
                    {"n_t1", c.surface.n_t1},
                    {"n_t2", c.surface.n_t2},
                    {"max_cells", c.surface.max_cells}};
    j["analysis"] = {{"plateau_tolerance", c.analysis.plateau_tolerance},
                     {"regime_factor", c.analysis.regime_factor},
                     {"lambda_tolerance", c.analysis.lambda_tolerance}};
    j["out_dir"] = c.out_dir;
    j["workers"] = c.workers;
    return j;
}

std::string config_reference() {
    return R"({
  // Reference Hamiltonian E = H(x_ref) and the retained energy window.
  "model": {
    "kind": "2dw",             // 2dw | ermt (ermt runs read ermt_cache)
    "hbar": 0.05,
    "e_cutoff": 6.0,           // oscillator basis keeps hbar (n1 + n2 + 1) <= e_cutoff
    "x_ref": 1.0,
    "sector": "ee+",           // full | ee+ | ee- | oo+ | oo- | eo
    "window": {
      "center": 3.0,
      "half_width": 1.0,
      "edge_margin": 0.2,      // window must end this fraction of the basis below the top level
      "cutoff_ratio": 1.4      // e_cutoff must reach this multiple of center + half_width
    },
    "basis_cap": 40000,
    "cache": "model.qrm",      // relative paths resolve against out_dir
    "ermt_cache": "ermt.qrm",
    "ermt_seed": 7,
    "sigma_convention": "first_off_diagonal"   // or energy_distance (pairs closer than Delta)
  },

  "preparation": {
    "kind": "ergodic",         // ergodic | eigenstate | coherent | random
    "epsilon_prep": 0.0,       // H_prep = E + epsilon_prep B
    "center": null,            // coherent: [q1, q2, p1, p2]; null picks Q = (0.6, 0.4), P1 = P2 on the shell
    "energy_width": 0.1,       // random: energy standard deviation
    "envelope": "gaussian",    // random: gaussian | box
    "center_energy": 3.0,      // random centre; seed levels are drawn near it
    "prep_time": 20.0,
    "level_index": null,       // fixed seed level (window index); null draws one per realization
    "seed_band": 0.1,
    "ergodicity": "strict",    // strict | warn on unsaturated participation ratio
    "saturation_threshold": 1.2,
    "checkpoints": 10,         // over [prep_time/2, prep_time]; saturated when the running PR average varies < threshold
    "pr_samples": 128          // PR(t) samples over [0, prep_time] behind the running average
  },

  "epsilon_units": "absolute", // absolute | delta_x_c (multiples of the model's Delta / sigma)

  "experiment": {
    "epsilon_evol": 0.0,       // H1,2 = E +- epsilon_evol B
    "period": 2.0,             // T
    "period_units": "survival_time",  // absolute | survival_time (multiples of the 1/e time of P_SR under H1)
    "samples": 512,            // steps per period, even
    "realizations": 1,
    "seed": 1,                 // realization r uses seed + r (+ --seed-offset)
    "averaging": "per_realization",   // or trace: t_r of the averaged trace
    "refine": true,            // parabolic refinement of t_r
    "decay_fits": true         // fit gamma to averaged P_SR and P_LE
  },

  // Cartesian product of the lists below; empty lists fall back to the
  // single experiment value. lambda and epsilon_evol are exclusive.
  "sweep": {
    "epsilon_prep": [],
    "epsilon_evol": [],
    "lambda": [],
    "period": []
  },

  "surface": {
    "t1_max": 0.0,             // 0: the experiment period
    "t2_max": 0.0,
    "n_t1": 129,
    "n_t2": 129,
    "max_cells": 4000000
  },

  "analysis": {
    "plateau_tolerance": 0.03,
    "regime_factor": 5.0,      // perturbative when epsilon < regime_factor * delta_x_c
    "lambda_tolerance": 1e-6   // relative tolerance for grouping lambda values
  },

  "out_dir": "out",
  "workers": 0                 // 0: hardware concurrency
}
)";
}

std::string config_hash(const json& j) { return sha256_hex(j.dump() + "|" + std::string(kCodeVersion)); }

}  // namespace qrev
