#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "qrev/model.hpp"

namespace qrev {

inline constexpr std::uint32_t kModelFormatVersion = 1;

/// Binary cache image: magic, format version, kind, parameters, full spectrum,
/// window, B and the window eigenvectors, ERMT provenance. Doubles are stored
/// bit-exact so a reload reproduces every derived quantity.
std::string serialize_model(const QuantizedModel& model);
QuantizedModel deserialize_model(std::string_view bytes);

void save_model(const QuantizedModel& model, const std::filesystem::path& path);
QuantizedModel load_model(const std::filesystem::path& path);

/// SHA-256 of the serialized image.
std::string model_hash(const QuantizedModel& model);

}  // namespace qrev
