#include "spademl/optics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "spademl/errors.hpp"

namespace spademl {

double hg_coefficient(int m, int n, double x, double y, double sigma_eff) {
    const double s2 = 2.0 * sigma_eff;
    const double pre = std::exp(-(x * x + y * y) / (8.0 * sigma_eff * sigma_eff));
    // (x/2s)^m / sqrt(m!) by recurrence, stable up to order ~60
    double tx = 1.0;
    for (int k = 1; k <= m; ++k) tx *= (x / s2) / std::sqrt(static_cast<double>(k));
    double ty = 1.0;
    for (int k = 1; k <= n; ++k) ty *= (y / s2) / std::sqrt(static_cast<double>(k));
    return pre * tx * ty;
}

std::pair<double, double> rotation_angle(double sigma_eff) {
    const double t = 2.0 * sigma_eff;
    const double denom = std::sqrt(t * t + 2.0 * t * t * t * t);
    return {t / denom, std::sqrt(2.0) * t * t / denom};
}

const char* mode_set_kind_name(ModeSetKind kind) {
    switch (kind) {
        case ModeSetKind::cartesian_lowest: return "cartesian_lowest";
        case ModeSetKind::diagonal_lowest: return "diagonal_lowest";
        case ModeSetKind::second_order_5dim: return "second_order_5dim";
        case ModeSetKind::extended_third_order: return "extended_third_order";
    }
    return "?";
}

namespace {

DetectionMode pure(int m, int n) {
    return {{{m, n, 1.0}}, "HG" + std::to_string(m) + std::to_string(n)};
}

} // namespace

ModeSet build_mode_set(ModeSetKind kind, double sigma_eff) {
    const double r = 1.0 / std::sqrt(2.0);
    ModeSet set;
    switch (kind) {
        case ModeSetKind::cartesian_lowest:
            set.modes = {pure(0, 0), pure(1, 0), pure(0, 1)};
            break;
        case ModeSetKind::diagonal_lowest:
            set.modes = {pure(0, 0),
                         {{{1, 0, r}, {0, 1, r}}, "HG10+HG01"},
                         {{{1, 0, r}, {0, 1, -r}}, "HG10-HG01"}};
            break;
        case ModeSetKind::second_order_5dim:
            set.modes = {pure(0, 1), pure(1, 0), pure(1, 1), pure(0, 2), pure(2, 0)};
            break;
        case ModeSetKind::extended_third_order: {
            auto [sp, cp] = rotation_angle(sigma_eff);
            set.modes = {pure(0, 0),
                         {{{0, 1, sp}, {0, 2, cp}}, "rot+"},
                         {{{0, 1, cp}, {0, 2, -sp}}, "rot-"},
                         pure(1, 0),
                         pure(2, 0),
                         pure(1, 1),
                         pure(0, 3),
                         pure(1, 2),
                         pure(2, 1),
                         pure(3, 0)};
            break;
        }
    }
    set.residual = true;
    return set;
}

void validate_mode_set(const ModeSet& modes) {
    const double tol = 1e-12;
    for (std::size_t i = 0; i < modes.modes.size(); ++i) {
        const auto& a = modes.modes[i];
        double norm = 0.0;
        for (const auto& t : a.terms) norm += t.coeff * t.coeff;
        if (std::abs(norm - 1.0) > tol)
            throw ConfigError("mode '" + a.name + "' is not unit norm");
        for (std::size_t j = i + 1; j < modes.modes.size(); ++j) {
            double dot = 0.0;
            for (const auto& ta : a.terms)
                for (const auto& tb : modes.modes[j].terms)
                    if (ta.m == tb.m && ta.n == tb.n) dot += ta.coeff * tb.coeff;
            if (std::abs(dot) > tol)
                throw ConfigError("modes '" + a.name + "' and '" +
                                  modes.modes[j].name + "' are not orthogonal");
        }
    }
}

ProbabilityVector spade_distribution(const SourceObject& src, const OpticsParams& params,
                                     const ModeSet& modes) {
    const double s = params.sigma_eff();
    ProbabilityVector out;
    out.labels.reserve(modes.modes.size() + 1);
    out.p.assign(modes.modes.size(), 0.0);
    for (const auto& mode : modes.modes) out.labels.push_back(mode.name);

    for (const auto& sample : src.samples) {
        for (std::size_t k = 0; k < modes.modes.size(); ++k) {
            double amp = 0.0;
            for (const auto& t : modes.modes[k].terms)
                amp += t.coeff * hg_coefficient(t.m, t.n, sample.x, sample.y, s);
            out.p[k] += sample.w * amp * amp;
        }
    }

    if (modes.residual) {
        double total = 0.0;
        for (double p : out.p) total += p;
        const double rest = 1.0 - total;
        if (rest < -1e-9)
            throw NumericalGuardError(
                "spade_distribution: negative residual (non-orthonormal mode set?)");
        out.labels.push_back("residual");
        out.p.push_back(std::max(rest, 0.0));
    }
    return out;
}

ProbabilityVector di_distribution(const SourceObject& src, const OpticsParams& params,
                                  const DiGrid& grid) {
    const double s = params.sigma_eff();
    const int he = grid.half_extent;
    const int side = grid.side();
    const double inv2s2 = 1.0 / (2.0 * s * s);

    std::vector<double> p(static_cast<std::size_t>(side) * side, 0.0);
    std::vector<double> kx(side), ky(side);
    double leakage = 0.0;

    for (const auto& sample : src.samples) {
        double sx = 0.0, sy = 0.0;
        for (int i = 0; i < side; ++i) {
            const double dx = (i - he) - sample.x;
            const double dy = (i - he) - sample.y;
            kx[i] = std::exp(-dx * dx * inv2s2);
            ky[i] = std::exp(-dy * dy * inv2s2);
            sx += kx[i];
            sy += ky[i];
        }
        // 1-D tail sums outside the grid; terms die off fast
        auto tail = [&](double center) {
            double t = 0.0;
            for (int i = he + 1;; ++i) {
                const double lo = -i - center, hi = i - center;
                const double add =
                    std::exp(-lo * lo * inv2s2) + std::exp(-hi * hi * inv2s2);
                t += add;
                if (add < 1e-18 * (1.0 + t)) break;
            }
            return t;
        };
        const double fx = sx + tail(sample.x);
        const double fy = sy + tail(sample.y);
        leakage += sample.w * (1.0 - (sx * sy) / (fx * fy));

        for (int r = 0; r < side; ++r) {
            const double wky = sample.w * ky[r];
            double* row = p.data() + static_cast<std::size_t>(r) * side;
            for (int c = 0; c < side; ++c) row[c] += wky * kx[c];
        }
    }

    if (leakage > 1e-6) {
        char msg[160];
        std::snprintf(msg, sizeof msg,
                      "di_distribution: grid leakage %.3e exceeds 1e-6 (half_extent %d "
                      "too small for sigma_eff %.3g)",
                      leakage, he, s);
        throw NumericalGuardError(msg);
    }

    double total = 0.0;
    for (double v : p) total += v;
    ProbabilityVector out;
    out.p.resize(p.size());
    out.labels.reserve(p.size());
    for (int r = 0; r < side; ++r)
        for (int c = 0; c < side; ++c) {
            out.labels.push_back(std::to_string(c - he) + "," + std::to_string(r - he));
            out.p[static_cast<std::size_t>(r) * side + c] =
                p[static_cast<std::size_t>(r) * side + c] / total;
        }
    return out;
}

} // namespace spademl
