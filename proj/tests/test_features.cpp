#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "spademl/errors.hpp"
#include "spademl/features.hpp"
#include "spademl/rng.hpp"
#include "spademl/sampler.hpp"

using namespace spademl;

namespace {

FrequencyVector grid_counts(const DiGrid& grid,
                            const std::vector<std::tuple<int, int, std::uint64_t>>& at) {
    const int side = grid.side();
    FrequencyVector f;
    f.counts.assign(static_cast<std::size_t>(side) * side, 0);
    f.block_draws.assign(f.counts.size(), 0);
    for (const auto& [x, y, c] : at) {
        f.counts[static_cast<std::size_t>(y + grid.half_extent) * side +
                 (x + grid.half_extent)] += c;
        f.n_draws += c;
    }
    for (auto& b : f.block_draws) b = f.n_draws;
    return f;
}

} // namespace

TEST_CASE("moments_exact hand-computed cases") {
    SUBCASE("symmetric pair on the x axis") {
        SourceObject src;
        src.samples = {{-1.0, 0.0, 0.5}, {1.0, 0.0, 0.5}};
        const auto m = moments_exact(src);
        CHECK(m.m20 == doctest::Approx(1.0));
        CHECK(m.m02 == doctest::Approx(0.0));
        CHECK(m.diag_plus == doctest::Approx(0.5));
        CHECK(m.diag_minus == doctest::Approx(0.5));
        CHECK(m.m03 == doctest::Approx(0.0));
    }
    SUBCASE("point mass at the origin") {
        SourceObject src;
        src.samples = {{0.0, 0.0, 1.0}};
        const auto m = moments_exact(src);
        CHECK(m.m20 == 0.0);
        CHECK(m.m02 == 0.0);
        CHECK(m.diag_plus == 0.0);
        CHECK(m.diag_minus == 0.0);
        CHECK(m.m03 == 0.0);
        CHECK(m.m04 == 0.0);
    }
}

TEST_CASE("parallelogram identity for random sources") {
    Rng rng(3);
    for (int rep = 0; rep < 20; ++rep) {
        SourceObject src;
        double sw = 0.0;
        for (int i = 0; i < 15; ++i) {
            const double w = rng.next_double() + 0.05;
            src.samples.push_back({rng.next_double() * 10 - 5,
                                   rng.next_double() * 10 - 5, w});
            sw += w;
        }
        for (auto& s : src.samples) s.w /= sw;
        const auto m = moments_exact(src);
        CHECK(m.diag_plus + m.diag_minus ==
              doctest::Approx(m.m20 + m.m02).epsilon(1e-9));
    }
}

TEST_CASE("moments_from_di point masses") {
    const DiGrid grid{40};
    SUBCASE("all counts at (3, 4)") {
        const auto f = grid_counts(grid, {{3, 4, 1000}});
        const auto m = moments_from_di(f, grid);
        CHECK(m.m20 == doctest::Approx(9.0));
        CHECK(m.m02 == doctest::Approx(16.0));
        CHECK(m.diag_plus == doctest::Approx(24.5));
        CHECK(m.diag_minus == doctest::Approx(0.5));
    }
    SUBCASE("even split between (-2, 0) and (2, 0)") {
        const auto f = grid_counts(grid, {{-2, 0, 500}, {2, 0, 500}});
        const auto m = moments_from_di(f, grid);
        CHECK(m.m20 == doctest::Approx(4.0));
        CHECK(m.m02 == doctest::Approx(0.0));
    }
}

TEST_CASE("DI moment bias: m20 estimates source m20 plus sigma_eff^2") {
    const DiGrid grid{40};
    SourceObject point;
    point.samples = {{0.0, 0.0, 1.0}};

    SUBCASE("exact distribution within 1e-9") {
        for (const double s : {2.0, 5.0}) {
            const auto p = di_distribution(point, OpticsParams{s, 1.0}, grid);
            // exact moments of the discrete DI distribution
            double m20 = 0.0;
            const int side = grid.side();
            for (int r = 0; r < side; ++r)
                for (int c = 0; c < side; ++c)
                    m20 += p.p[static_cast<std::size_t>(r) * side + c] *
                           (c - grid.half_extent) * (c - grid.half_extent);
            // the discrete Gaussian second moment differs from s^2 only
            // through lattice corrections, negligible for s >= 2
            CHECK(m20 == doctest::Approx(s * s).epsilon(1e-9));
        }
    }
    SUBCASE("sampled at N = 1e5 within 4 standard errors") {
        const double s = 5.0;
        const std::uint64_t n = 100000;
        const auto p = di_distribution(point, OpticsParams{s, 1.0}, grid);
        const auto f = sample_frequencies(p, n, 12345);
        const auto m = moments_from_di(f, grid);
        // Var[x^2] for a Gaussian is 2 s^4
        const double se = std::sqrt(2.0 * s * s * s * s / n);
        CHECK(std::abs(m.m20 - s * s) < 4.0 * se);
    }
}

TEST_CASE("assemble_features ordering contracts") {
    SUBCASE("frequencies pass through in order") {
        FrequencyVector f;
        f.labels = {"HG00", "HG10+HG01", "HG10-HG01", "residual"};
        f.counts = {10, 20, 30, 40};
        f.block_draws = {100, 100, 100, 100};
        f.n_draws = 100;
        const auto v = assemble_features(f, "spade_diagonal");
        REQUIRE(v.values.size() == 4);
        CHECK(v.values[0] == doctest::Approx(0.1));
        CHECK(v.values[3] == doctest::Approx(0.4));
        CHECK(v.schema == "spade_diagonal");
    }
    SUBCASE("diagonal moment schema") {
        MomentEstimates m;
        m.m20 = 1.0;
        m.m02 = 2.0;
        m.diag_plus = 1.7;
        m.diag_minus = 1.3;
        const auto v = assemble_features(m, "moments_diag");
        REQUIRE(v.values.size() == 2);
        CHECK(v.values[0] == 1.7);
        CHECK(v.values[1] == 1.3);
    }
    SUBCASE("unknown moment schema is rejected") {
        CHECK_THROWS_AS(assemble_features(MomentEstimates{}, "nope"), ConfigError);
    }
    SUBCASE("grid frequencies flatten row-major") {
        const DiGrid grid{40};
        const auto f = grid_counts(grid, {{0, 0, 1}});
        const auto v = assemble_features(f, "di");
        CHECK(v.values.size() == 81u * 81u);
        CHECK(v.values[static_cast<std::size_t>(40) * 81 + 40] == 1.0);
    }
}

TEST_CASE("moments_from_di rejects a mismatched grid") {
    FrequencyVector f;
    f.counts.assign(9, 1);
    f.block_draws.assign(9, 9);
    f.n_draws = 9;
    CHECK_THROWS_AS(moments_from_di(f, DiGrid{40}), ConfigError);
}
