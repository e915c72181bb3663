#include "polyrx/rng.hpp"

#include <cmath>

namespace polyrx {

double Rng::normal() {
    if (have_cached_) {
        have_cached_ = false;
        return cached_;
    }
    // Box-Muller on open-interval uniforms.
    double u1;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
}

cpx Rng::cnormal() {
    const double s = 1.0 / std::sqrt(2.0);
    const double re = normal();
    const double im = normal();
    return cpx(s * re, s * im);
}

std::vector<std::uint8_t> Rng::bits(std::size_t n) {
    std::vector<std::uint8_t> out(n);
    std::uint64_t word = 0;
    int left = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (left == 0) {
            word = next_u64();
            left = 64;
        }
        out[i] = static_cast<std::uint8_t>(word & 1u);
        word >>= 1;
        --left;
    }
    return out;
}

std::uint64_t Rng::seed_mix(std::uint64_t a, std::uint64_t b) {
    // splitmix64 over the concatenated state.
    std::uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace polyrx
