#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "spademl/errors.hpp"
#include "spademl/sampler.hpp"

using namespace spademl;

namespace {

ProbabilityVector make_pv(std::vector<double> p) {
    ProbabilityVector pv;
    pv.p = std::move(p);
    for (std::size_t i = 0; i < pv.p.size(); ++i)
        pv.labels.push_back("o" + std::to_string(i));
    return pv;
}

} // namespace

TEST_CASE("one-hot distribution puts every draw on the hot outcome") {
    const auto pv = make_pv({0.0, 1.0, 0.0});
    const auto f = sample_frequencies(pv, 1234, 5);
    CHECK(f.counts[0] == 0);
    CHECK(f.counts[1] == 1234);
    CHECK(f.counts[2] == 0);
    CHECK(f.frequencies()[1] == 1.0);
}

TEST_CASE("counts sum to N and frequencies to one") {
    const auto pv = make_pv({0.2, 0.3, 0.1, 0.4});
    const auto f = sample_frequencies(pv, 997, 7);
    CHECK(std::accumulate(f.counts.begin(), f.counts.end(), std::uint64_t{0}) == 997);
    const auto freq = f.frequencies();
    CHECK(std::accumulate(freq.begin(), freq.end(), 0.0) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("binomial moments at p = 0.5") {
    const auto pv = make_pv({0.5, 0.5});
    const std::uint64_t n = 2000;
    const int reps = 300;
    double mean = 0.0, var = 0.0;
    for (int r = 0; r < reps; ++r) {
        const auto f = sample_frequencies(pv, n, 1000 + r);
        const double x = f.frequencies()[0];
        mean += x;
        var += (x - 0.5) * (x - 0.5);
    }
    mean /= reps;
    var /= reps;
    const double se = 0.5 / std::sqrt(static_cast<double>(n * reps));
    CHECK(std::abs(mean - 0.5) < 4.0 * se);
    CHECK(var == doctest::Approx(0.25 / n).epsilon(0.35));
}

TEST_CASE("determinism: identical inputs give identical counts") {
    const auto pv = make_pv({0.11, 0.29, 0.6});
    const auto a = sample_frequencies(pv, 5000, 42);
    const auto b = sample_frequencies(pv, 5000, 42);
    CHECK(a.counts == b.counts);
    const auto c = sample_frequencies(pv, 5000, 43);
    CHECK(a.counts != c.counts);
}

TEST_CASE("N = 0 is rejected") {
    CHECK_THROWS_AS(sample_frequencies(make_pv({1.0}), 0, 0), ConfigError);
}

TEST_CASE("chi-square consistency over 100 seeds") {
    const auto pv = make_pv({0.1, 0.25, 0.05, 0.6});
    const std::uint64_t n = 100000;
    int exceed = 0;
    for (int seed = 0; seed < 100; ++seed) {
        const auto f = sample_frequencies(pv, n, 7000 + seed);
        double chi2 = 0.0;
        for (std::size_t i = 0; i < pv.p.size(); ++i) {
            const double expected = pv.p[i] * n;
            const double d = f.counts[i] - expected;
            chi2 += d * d / expected;
        }
        // 99th percentile of chi-square with 3 dof
        if (chi2 > 11.345) ++exceed;
    }
    CHECK(exceed <= 5);
}

TEST_CASE("unbiasedness across seeds") {
    const auto pv = make_pv({0.3, 0.7});
    const std::uint64_t n = 10000;
    const int reps = 200;
    double mean = 0.0;
    for (int r = 0; r < reps; ++r)
        mean += sample_frequencies(pv, n, 31000 + r).frequencies()[0];
    mean /= reps;
    const double se = std::sqrt(0.3 * 0.7 / static_cast<double>(n * reps));
    CHECK(std::abs(mean - 0.3) < 4.0 * se);
}

TEST_CASE("sample_split_bases") {
    const auto cart = make_pv({1.0, 0.0});
    const auto diag = make_pv({0.0, 1.0});
    SUBCASE("both blocks one-hot at N = 2") {
        const auto f = sample_split_bases(cart, diag, 2, 1);
        REQUIRE(f.counts.size() == 4);
        CHECK(f.counts[0] == 1);
        CHECK(f.counts[3] == 1);
        CHECK(f.frequencies()[0] == 1.0);
        CHECK(f.frequencies()[3] == 1.0);
    }
    SUBCASE("even split at N = 5000") {
        const auto f = sample_split_bases(cart, diag, 5000, 1);
        CHECK(f.counts[0] + f.counts[1] == 2500);
        CHECK(f.counts[2] + f.counts[3] == 2500);
    }
    SUBCASE("odd N gives the extra draw to the Cartesian block") {
        const auto f = sample_split_bases(cart, diag, 7, 1);
        CHECK(f.counts[0] + f.counts[1] == 4);
        CHECK(f.counts[2] + f.counts[3] == 3);
        CHECK(f.block_draws[0] == 4);
        CHECK(f.block_draws[2] == 3);
    }
    SUBCASE("N < 2 is rejected") {
        CHECK_THROWS_AS(sample_split_bases(cart, diag, 1, 0), ConfigError);
    }
}
