#include "qrev/common.hpp"

#include <array>
#include <utility>

namespace qrev {

namespace {

constexpr std::array<std::pair<Sector, std::string_view>, 6> kSectorNames{{
    {Sector::full, "full"},
    {Sector::even_even_sym, "ee+"},
    {Sector::even_even_anti, "ee-"},
    {Sector::odd_odd_sym, "oo+"},
    {Sector::odd_odd_anti, "oo-"},
    {Sector::even_odd, "eo"},
}};

}  // namespace

std::string_view to_string(ModelKind kind) {
    return kind == ModelKind::ermt ? "ermt" : "2dw";
}

ModelKind model_kind_from_string(std::string_view text) {
    if (text == "2dw") return ModelKind::physical_2dw;
    if (text == "ermt") return ModelKind::ermt;
    throw ConfigError("unknown model kind '" + std::string(text) + "' (expected 2dw or ermt)");
}

std::string_view to_string(Sector sector) {
    for (const auto& [s, name] : kSectorNames) {
        if (s == sector) return name;
    }
    return "full";
}

Sector sector_from_string(std::string_view text) {
    for (const auto& [s, name] : kSectorNames) {
        if (name == text) return s;
    }
    throw ConfigError("unknown symmetry sector '" + std::string(text) +
                      "' (expected full, ee+, ee-, oo+, oo-, eo)");
}

}  // namespace qrev
