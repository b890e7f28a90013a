#pragma once

#include <cstdint>

#include "qrev/model.hpp"

namespace qrev {

/// ERMT counterpart of a physical model: every off-diagonal B_nm (n < m) gets
/// an independent fair random sign, mirrored to B_mn; the diagonal and the
/// spectrum are copied unchanged. Signs come from one mt19937_64 stream
/// seeded with `seed`, consumed row by row over the strict upper triangle.
QuantizedModel randomize_signs(const QuantizedModel& parent, std::uint64_t seed);

}  // namespace qrev
