#pragma once

#include <vector>

#include "polyrx/iq.hpp"

namespace polyrx {

// In-place iterative radix-2 FFT. Size must be a power of two.
// Forward:  X[k] = sum_n x[n] exp(-j 2 pi k n / N)
// Inverse:  x[n] = (1/N) sum_k X[k] exp(+j 2 pi k n / N)
void fft_inplace(std::vector<cpx>& x, bool inverse);

std::vector<cpx> fft(std::vector<cpx> x);
std::vector<cpx> ifft(std::vector<cpx> x);

bool is_pow2(std::size_t n);

}  // namespace polyrx
