#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qrev/analysis.hpp"
#include "qrev/experiment.hpp"
#include "qrev/model.hpp"

namespace qrev {

/// "# key=value" lines written ahead of the column row.
using CsvHeader = std::vector<std::pair<std::string, std::string>>;

/// Shortest round-trip text for a double ("inf", "nan" for the specials).
std::string format_number(double v);

void write_trace_csv(const std::filesystem::path& path, const CsvHeader& header, std::span<const double> times,
                     std::span<const double> p);

void write_surface_csv(const std::filesystem::path& path, const CsvHeader& header, std::span<const double> t1,
                       std::span<const double> t2, const Eigen::MatrixXd& values);

void write_results_csv(const std::filesystem::path& path, const CsvHeader& header,
                       std::span<const ExperimentOutcome> outcomes);

void write_realizations_csv(const std::filesystem::path& path, const CsvHeader& header,
                            std::span<const ExperimentOutcome> outcomes);

void write_scaling_csv(const std::filesystem::path& path, const CsvHeader& header, const ScalingCurve& curve);

void write_band_profile_csv(const std::filesystem::path& path, const CsvHeader& header,
                            const SpectralDiagnostics& diagnostics);

struct CsvTable {
    CsvHeader header;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    [[nodiscard]] std::size_t column(std::string_view name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

/// Scaling points from a results table (rows with an error tag are skipped).
std::vector<ScalingPoint> scaling_points_from_results(const CsvTable& table);

}  // namespace qrev
