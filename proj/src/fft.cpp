#include "polyrx/fft.hpp"

#include <cmath>

#include "polyrx/errors.hpp"

namespace polyrx {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void fft_inplace(std::vector<cpx>& x, bool inverse) {
    const std::size_t n = x.size();
    if (n <= 1) return;
    if (!is_pow2(n)) throw ParamError("fft size must be a power of two, got " + std::to_string(n));

    // Bit-reversal permutation.
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }

    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * M_PI / static_cast<double>(len);
        const cpx wstep(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cpx w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const cpx u = x[i + k];
                const cpx v = x[i + k + len / 2] * w;
                x[i + k] = u + v;
                x[i + k + len / 2] = u - v;
                w *= wstep;
            }
        }
    }

    if (inverse) {
        const double inv = 1.0 / static_cast<double>(n);
        for (cpx& v : x) v *= inv;
    }
}

std::vector<cpx> fft(std::vector<cpx> x) {
    fft_inplace(x, false);
    return x;
}

std::vector<cpx> ifft(std::vector<cpx> x) {
    fft_inplace(x, true);
    return x;
}

}  // namespace polyrx
