#include "qrev/ermt.hpp"

#include <random>

#include "qrev/model_io.hpp"

namespace qrev {

QuantizedModel randomize_signs(const QuantizedModel& parent, std::uint64_t seed) {
    if (parent.kind != ModelKind::physical_2dw) {
        throw std::invalid_argument("randomize_signs: parent must be a physical 2DW model");
    }
    QuantizedModel out = parent;
    out.kind = ModelKind::ermt;
    out.ermt_seed = seed;
    out.parent_hash = model_hash(parent);

    std::mt19937_64 engine(seed);
    const Eigen::Index n = out.b_matrix.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            if (engine() >> 63) out.b_matrix(i, j) = -out.b_matrix(i, j);
            out.b_matrix(j, i) = out.b_matrix(i, j);
        }
    }
    return out;
}

}  // namespace qrev
