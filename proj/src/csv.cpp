#include "qrev/csv.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace qrev {

namespace {

std::ofstream open_csv(const std::filesystem::path& path, const CsvHeader& header) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    for (const auto& [k, v] : header) out << "# " << k << '=' << v << '\n';
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw Error("error while writing " + path.string());
}

std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c == '\n' ? ' ' : c;
    }
    return q + '"';
}

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    cells.push_back(std::move(cur));
    return cells;
}

double parse_number(const std::string& s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "nan" || s.empty()) return std::numeric_limits<double>::quiet_NaN();
    try {
        return std::stod(s);
    } catch (const std::exception&) {
        throw ConfigError("not a number in CSV: '" + s + "'");
    }
}

}  // namespace

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return fmt::format("{}", v);
}

void write_trace_csv(const std::filesystem::path& path, const CsvHeader& header, std::span<const double> times,
                     std::span<const double> p) {
    auto out = open_csv(path, header);
    out << "t,P\n";
    for (std::size_t i = 0; i < times.size(); ++i) out << format_number(times[i]) << ',' << format_number(p[i]) << '\n';
    finish(out, path);
}

void write_surface_csv(const std::filesystem::path& path, const CsvHeader& header, std::span<const double> t1,
                       std::span<const double> t2, const Eigen::MatrixXd& values) {
    auto out = open_csv(path, header);
    out << "t1,t2,P\n";
    for (std::size_t i = 0; i < t1.size(); ++i) {
        for (std::size_t j = 0; j < t2.size(); ++j) {
            out << format_number(t1[i]) << ',' << format_number(t2[j]) << ','
                << format_number(values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) << '\n';
        }
    }
    finish(out, path);
}

void write_results_csv(const std::filesystem::path& path, const CsvHeader& header,
                       std::span<const ExperimentOutcome> outcomes) {
    auto out = open_csv(path, header);
    out << "config_hash,model,hbar,kind,epsilon_prep,epsilon_evol,lambda,lambda_flag,T,t_r,t_r_over_T,"
           "t_r_over_T_std,p_max,gamma_sr,gamma_le,echo_fraction,n_seeds,error\n";
    for (const auto& o : outcomes) {
        const bool ok = o.error.empty();
        auto num = [&](double v) { return ok ? format_number(v) : std::string("nan"); };
        out << o.hash << ',' << to_string(o.model_kind) << ',' << format_number(o.hbar) << ','
            << to_string(o.spec.preparation.kind) << ',' << format_number(o.spec.preparation.epsilon_prep) << ','
            << format_number(o.spec.epsilon_evol) << ',' << format_number(o.lambda.value) << ','
            << lambda_label(o.lambda) << ',' << num(o.period) << ',' << num(o.aggregate.t_r) << ','
            << num(o.aggregate.t_r_over_T) << ',' << num(o.aggregate.spread) << ',' << num(o.aggregate.p_max) << ','
            << num(o.gamma_sr) << ',' << num(o.gamma_le) << ',' << num(o.echo_fraction) << ','
            << (ok ? o.aggregate.n_realizations : 0) << ',' << quote(o.error) << '\n';
    }
    finish(out, path);
}

void write_realizations_csv(const std::filesystem::path& path, const CsvHeader& header,
                            std::span<const ExperimentOutcome> outcomes) {
    auto out = open_csv(path, header);
    out << "config_hash,seed,seed_level,lambda,T,t_r,t_r_over_T,p_max,p_sr_half,p_le_half,echo_condition,saturated\n";
    for (const auto& o : outcomes) {
        for (const auto& r : o.realizations) {
            out << o.hash << ',' << r.seed << ',' << (r.seed_level ? std::to_string(*r.seed_level) : "") << ','
                << format_number(o.lambda.value) << ',' << format_number(o.period) << ','
                << format_number(r.result.t_r) << ',' << format_number(r.result.t_r_over_T) << ','
                << format_number(r.result.p_max) << ',' << format_number(r.echo.p_sr) << ','
                << format_number(r.echo.p_le) << ',' << (r.echo.satisfied ? 1 : 0) << ',' << (r.saturated ? 1 : 0)
                << '\n';
        }
    }
    finish(out, path);
}

void write_scaling_csv(const std::filesystem::path& path, const CsvHeader& header, const ScalingCurve& curve) {
    auto out = open_csv(path, header);
    out << "lambda_bin,f_mean,f_std,n\n";
    for (const auto& b : curve.bins) {
        out << format_number(b.lambda) << ',' << format_number(b.f_mean) << ',' << format_number(b.f_std) << ','
            << b.n << '\n';
    }
    finish(out, path);
}

void write_band_profile_csv(const std::filesystem::path& path, const CsvHeader& header,
                            const SpectralDiagnostics& d) {
    auto out = open_csv(path, header);
    out << "omega_lo,omega_hi,mean_b2,count\n";
    for (const auto& b : d.band_profile) {
        out << format_number(b.omega_lo) << ',' << format_number(b.omega_hi) << ',' << format_number(b.mean_b2) << ','
            << b.count << '\n';
    }
    finish(out, path);
}

std::size_t CsvTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i] == name) return i;
    }
    throw ConfigError("CSV has no column '" + std::string(name) + "'");
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    CsvTable table;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.rfind("# ", 0) == 0) {
            const auto eq = line.find('=');
            if (eq != std::string::npos) table.header.emplace_back(line.substr(2, eq - 2), line.substr(eq + 1));
            continue;
        }
        if (table.columns.empty()) {
            table.columns = split_row(line);
        } else {
            table.rows.push_back(split_row(line));
        }
    }
    return table;
}

std::vector<ScalingPoint> scaling_points_from_results(const CsvTable& t) {
    const std::size_t c_lambda = t.column("lambda");
    const std::size_t c_flag = t.column("lambda_flag");
    const std::size_t c_f = t.column("t_r_over_T");
    const std::size_t c_std = t.column("t_r_over_T_std");
    const std::size_t c_ep = t.column("epsilon_prep");
    const std::size_t c_ev = t.column("epsilon_evol");
    const std::size_t c_T = t.column("T");
    const std::size_t c_model = t.column("model");
    const std::size_t c_n = t.column("n_seeds");
    const std::size_t c_err = t.column("error");
    std::vector<ScalingPoint> points;
    for (const auto& row : t.rows) {
        if (row.size() != t.columns.size()) throw ConfigError("ragged row in results CSV");
        if (!row[c_err].empty()) continue;
        ScalingPoint p;
        p.lambda.value = parse_number(row[c_lambda]);
        p.lambda.flag = row[c_flag] == "inf"       ? LambdaFlag::infinite
                        : row[c_flag] == "numeric" ? LambdaFlag::numeric
                                                   : LambdaFlag::small;
        p.t_r_over_T = parse_number(row[c_f]);
        p.spread = parse_number(row[c_std]);
        p.epsilon_prep = parse_number(row[c_ep]);
        p.epsilon_evol = parse_number(row[c_ev]);
        p.period = parse_number(row[c_T]);
        p.kind = model_kind_from_string(row[c_model]);
        p.n = static_cast<std::size_t>(parse_number(row[c_n]));
        points.push_back(p);
    }
    return points;
}

}  // namespace qrev
