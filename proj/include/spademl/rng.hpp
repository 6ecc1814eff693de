#ifndef SPADEML_RNG_HPP
#define SPADEML_RNG_HPP

#include <cstdint>
#include <string_view>

namespace spademl {

// splitmix64, used both as a stream generator and as a mixing function
// for deriving child seeds. Output does not depend on platform or on
// any standard-library distribution internals.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e9b5ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t hash_string(std::string_view s) {
    // FNV-1a
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

// Stable child-seed derivation: mixing in extra components never
// perturbs seeds derived from a different component list.
inline std::uint64_t derive_seed(std::uint64_t master) { return master; }

template <typename... Rest>
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t next, Rest... rest) {
    std::uint64_t s = master ^ 0x6a09e667f3bcc909ull;
    std::uint64_t mixed = splitmix64(s) ^ next;
    return derive_seed(splitmix64(mixed), rest...);
}

template <typename... Rest>
std::uint64_t derive_seed(std::uint64_t master, std::string_view next, Rest... rest) {
    return derive_seed(master, hash_string(next), rest...);
}

// Counter-based uniform stream. Each consumer owns its own Rng seeded
// via derive_seed, so results are independent of execution order.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    // uniform in [0, 1)
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, n)
    std::uint64_t next_below(std::uint64_t n) {
        // rejection sampling to avoid modulo bias
        std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    // standard normal via Box-Muller (no cached second value, keeps the
    // stream position a pure function of the draw count)
    double next_normal();

private:
    std::uint64_t state_;
};

} // namespace spademl

#endif
