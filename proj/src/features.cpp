#include "spademl/features.hpp"

#include <charconv>

#include "spademl/errors.hpp"

namespace spademl {

MomentEstimates moments_exact(const SourceObject& src) {
    MomentEstimates m;
    for (const auto& s : src.samples) {
        m.m20 += s.w * s.x * s.x;
        m.m02 += s.w * s.y * s.y;
        m.diag_plus += 0.5 * s.w * (s.x + s.y) * (s.x + s.y);
        m.diag_minus += 0.5 * s.w * (s.x - s.y) * (s.x - s.y);
        m.m03 += s.w * s.y * s.y * s.y;
        m.m04 += s.w * s.y * s.y * s.y * s.y;
    }
    return m;
}

MomentEstimates moments_from_di(const FrequencyVector& f, const DiGrid& grid) {
    const int side = grid.side();
    const int he = grid.half_extent;
    if (f.counts.size() != static_cast<std::size_t>(side) * side)
        throw ConfigError("moments_from_di: frequency vector does not match grid");

    MomentEstimates m;
    const double n = static_cast<double>(f.n_draws);
    for (int r = 0; r < side; ++r) {
        const double y = r - he;
        for (int c = 0; c < side; ++c) {
            const double x = c - he;
            const double w =
                static_cast<double>(f.counts[static_cast<std::size_t>(r) * side + c]) / n;
            if (w == 0.0) continue;
            m.m20 += w * x * x;
            m.m02 += w * y * y;
            m.diag_plus += 0.5 * w * (x + y) * (x + y);
            m.diag_minus += 0.5 * w * (x - y) * (x - y);
            m.m03 += w * y * y * y;
            m.m04 += w * y * y * y * y;
        }
    }
    return m;
}

FeatureVector assemble_features(const FrequencyVector& f, const std::string& schema) {
    return {f.frequencies(), schema};
}

FeatureVector assemble_features(const MomentEstimates& m, const std::string& schema) {
    if (schema == "moments_diag") return {{m.diag_plus, m.diag_minus}, schema};
    if (schema == "moments_cartesian") return {{m.m20, m.m02}, schema};
    if (schema == "moments_full")
        return {{m.m20, m.m02, m.diag_plus, m.diag_minus, m.m03, m.m04}, schema};
    throw ConfigError("assemble_features: unknown moment schema '" + schema + "'");
}

} // namespace spademl
