#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "qrev/config.hpp"
#include "qrev/csv.hpp"
#include "qrev/hash.hpp"

using namespace qrev;
using nlohmann::json;

TEST_CASE("reference config parses to the defaults") {
    const json ref = json::parse(config_reference(), nullptr, true, true);
    const Config parsed = parse_config(ref);
    const Config defaults = parse_config(json::object());
    CHECK(to_json(parsed) == to_json(defaults));
    CHECK(to_json(parse_config(to_json(parsed))) == to_json(parsed));
}

TEST_CASE("config values and validation") {
    const json j = json::parse(R"({
        "model": {"hbar": 0.04, "sector": "full", "window": {"half_width": 0.5}},
        "preparation": {"kind": "coherent", "center": [0.6, 0.4, 1.5, 1.5]},
        "epsilon_units": "delta_x_c",
        "experiment": {"epsilon_evol": 2.0, "period": 3.5, "period_units": "absolute", "realizations": 4},
        "sweep": {"lambda": [0.1, 0.2]}
    })");
    const Config c = parse_config(j);
    CHECK(c.model.params.hbar == 0.04);
    CHECK(c.model.params.sector == Sector::full);
    CHECK(c.model.params.window.half_width == 0.5);
    CHECK(c.model.params.window.e_center == 3.0);
    CHECK(c.preparation.kind == PreparationKind::coherent);
    REQUIRE(c.preparation.center);
    CHECK(c.preparation.center->p2 == 1.5);
    CHECK(c.epsilon_units == EpsilonUnits::delta_x_c);
    CHECK(c.experiment.period_units == PeriodUnits::absolute);
    CHECK(c.experiment.realizations == 4);
    CHECK(c.sweep.lambda.size() == 2);

    CHECK_THROWS_AS(parse_config(json::parse(R"({"model": {"hbarr": 0.1}})")), ConfigError);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"extra": 1})")), ConfigError);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"model": {"hbar": "big"}})")), ConfigError);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"model": {"hbar": -1}})")), ConfigError);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"experiment": {"samples": 7}})")), ConfigError);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"preparation": {"kind": "thermal"}})")), ConfigError);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"sweep": {"lambda": [1], "epsilon_evol": [1]}})")), ConfigError);
}

TEST_CASE("config files allow comments") {
    const auto path = std::filesystem::temp_directory_path() / "qrev_unit_config.json";
    std::ofstream(path) << "{\n  // comment\n  \"workers\": 3 /* inline */\n}\n";
    CHECK(load_config(path).workers == 3);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_config(path), ConfigError);
}

TEST_CASE("config hash is deterministic and sensitive") {
    const json a = to_json(parse_config(json::object()));
    json b = a;
    CHECK(config_hash(a) == config_hash(b));
    b["workers"] = 5;
    CHECK(config_hash(a) != config_hash(b));
    CHECK(config_hash(a).size() == 64);
}

TEST_CASE("sha256 known answer") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("number formatting round-trips") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 12345.678, -2.5}) {
        CHECK(std::stod(format_number(v)) == v);
    }
    CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
}

TEST_CASE("trace and surface csv") {
    const auto dir = std::filesystem::temp_directory_path() / "qrev_unit_csv";
    std::filesystem::create_directories(dir);
    const std::vector<double> t{0.0, 0.5, 1.0};
    const std::vector<double> p{1.0, 0.25, 0.125};
    write_trace_csv(dir / "t.csv", {{"config_hash", "abc"}, {"T", "1"}}, t, p);
    const CsvTable table = read_csv(dir / "t.csv");
    REQUIRE(table.columns == std::vector<std::string>{"t", "P"});
    REQUIRE(table.rows.size() == 3);
    CHECK(table.rows[1][table.column("P")] == "0.25");
    CHECK(table.header[0].first == "config_hash");
    CHECK(table.header[0].second == "abc");
    CHECK_THROWS((void)table.column("missing"));

    Eigen::MatrixXd s(3, 2);
    s << 1, 2, 3, 4, 5, 6;
    write_surface_csv(dir / "s.csv", {}, t, std::vector<double>{0.0, 1.0}, s);
    const CsvTable st = read_csv(dir / "s.csv");
    CHECK(st.columns == std::vector<std::string>{"t1", "t2", "P"});
    CHECK(st.rows.size() == 6);
    std::filesystem::remove_all(dir);
}

TEST_CASE("scaling csv and results round trip") {
    const auto dir = std::filesystem::temp_directory_path() / "qrev_unit_scaling";
    std::filesystem::create_directories(dir);
    ScalingCurve curve;
    curve.bins = {{0.0, 1.0, 0.0, 3}, {0.5, 0.8, 0.02, 2}, {std::numeric_limits<double>::infinity(), 0.5, 0.01, 4}};
    write_scaling_csv(dir / "scaling.csv", {{"code_version", "x"}}, curve);
    const CsvTable table = read_csv(dir / "scaling.csv");
    CHECK(table.columns == std::vector<std::string>{"lambda_bin", "f_mean", "f_std", "n"});
    CHECK(table.rows[2][0] == "inf");
    std::filesystem::remove_all(dir);
}
