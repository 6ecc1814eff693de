#include "spademl/sampler.hpp"

#include <algorithm>
#include <cmath>

#include "spademl/errors.hpp"
#include "spademl/rng.hpp"

namespace spademl {

std::vector<double> FrequencyVector::frequencies() const {
    std::vector<double> f(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i)
        f[i] = static_cast<double>(counts[i]) / static_cast<double>(block_draws[i]);
    return f;
}

namespace {

std::vector<std::uint64_t> multinomial(const std::vector<double>& p,
                                       std::uint64_t n_draws, Rng& rng) {
    std::vector<double> cdf(p.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        acc += p[i];
        cdf[i] = acc;
    }
    // guard against rounding: the last bin absorbs everything
    cdf.back() = std::max(cdf.back(), 1.0);

    std::vector<std::uint64_t> counts(p.size(), 0);
    for (std::uint64_t d = 0; d < n_draws; ++d) {
        const double u = rng.next_double() * acc;
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        const std::size_t k = std::min<std::size_t>(it - cdf.begin(), p.size() - 1);
        ++counts[k];
    }
    return counts;
}

} // namespace

FrequencyVector sample_frequencies(const ProbabilityVector& p, std::uint64_t n_draws,
                                   std::uint64_t seed) {
    if (n_draws == 0) throw ConfigError("sample_frequencies: N must be >= 1");
    Rng rng(seed);
    FrequencyVector out;
    out.labels = p.labels;
    out.counts = multinomial(p.p, n_draws, rng);
    out.block_draws.assign(p.p.size(), n_draws);
    out.n_draws = n_draws;
    return out;
}

FrequencyVector sample_split_bases(const ProbabilityVector& p_cartesian,
                                   const ProbabilityVector& p_diagonal,
                                   std::uint64_t n_draws, std::uint64_t seed) {
    if (n_draws < 2) throw ConfigError("sample_split_bases: N must be >= 2");
    const std::uint64_t n_cart = (n_draws + 1) / 2;  // Cartesian gets the odd draw
    const std::uint64_t n_diag = n_draws / 2;

    Rng rng(seed);
    FrequencyVector out;
    out.n_draws = n_draws;
    auto append = [&](const ProbabilityVector& p, std::uint64_t n, const char* prefix) {
        auto counts = multinomial(p.p, n, rng);
        for (std::size_t i = 0; i < counts.size(); ++i) {
            out.labels.push_back(std::string(prefix) + p.labels[i]);
            out.counts.push_back(counts[i]);
            out.block_draws.push_back(n);
        }
    };
    append(p_cartesian, n_cart, "cart:");
    append(p_diagonal, n_diag, "diag:");
    return out;
}

} // namespace spademl
