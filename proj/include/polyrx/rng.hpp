#pragma once

#include <cstdint>
#include <vector>

#include "polyrx/iq.hpp"

namespace polyrx {

// Deterministic random source. All randomness in the project flows through
// this class so that runs are bit-reproducible from their seeds. The
// mappings from raw bits to uniform/normal variates are written out by hand
// instead of using <random> distributions, whose output sequences are
// implementation defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {
        // Warm up so that nearby seeds decorrelate.
        next_u64();
        next_u64();
    }

    std::uint64_t next_u64() {
        // splitmix64
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). n must be > 0.
    std::uint64_t uniform_int(std::uint64_t n) { return next_u64() % n; }

    // Standard normal via Box-Muller; pairs are cached.
    double normal();

    // Complex circularly-symmetric normal with unit total variance
    // (each component has variance 1/2).
    cpx cnormal();

    // n independent fair bits.
    std::vector<std::uint8_t> bits(std::size_t n);

    // Derived stream: deterministic function of this rng's seed and `id`,
    // independent of how much has been drawn from the parent.
    Rng fork(std::uint64_t id) const { return Rng(seed_mix(state0_, id)); }

private:
    static std::uint64_t seed_mix(std::uint64_t a, std::uint64_t b);

    std::uint64_t state_;
    std::uint64_t state0_ = state_;
    bool have_cached_ = false;
    double cached_ = 0.0;
};

}  // namespace polyrx
