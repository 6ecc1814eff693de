#ifndef SPADEML_SAMPLER_HPP
#define SPADEML_SAMPLER_HPP

#include <cstdint>
#include <vector>

#include "spademl/optics.hpp"

namespace spademl {

// Finite-N relative frequencies. Counts are exact; f is derived.
// block_draws[i] is the number of draws of the block outcome i belongs
// to (equal to n_draws except for composite measurements).
struct FrequencyVector {
    std::vector<std::string> labels;
    std::vector<std::uint64_t> counts;
    std::vector<std::uint64_t> block_draws;
    std::uint64_t n_draws = 0;

    std::vector<double> frequencies() const;
};

// Multinomial(N, p) by N inverse-CDF draws from a per-call seeded
// stream. Identical (p, N, seed) gives identical counts.
FrequencyVector sample_frequencies(const ProbabilityVector& p, std::uint64_t n_draws,
                                   std::uint64_t seed);

// Half/half composite measurement: ceil(N/2) Cartesian draws followed
// by floor(N/2) diagonal draws; each block normalized by its own count.
FrequencyVector sample_split_bases(const ProbabilityVector& p_cartesian,
                                   const ProbabilityVector& p_diagonal,
                                   std::uint64_t n_draws, std::uint64_t seed);

} // namespace spademl

#endif
