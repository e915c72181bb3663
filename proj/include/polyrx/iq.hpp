#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace polyrx {

// One complex baseband sample. Streams are kept in double precision in
// memory; file storage is float32 I/Q pairs (see dataset.hpp).
using cpx = std::complex<double>;

// A finite run of complex baseband samples at a fixed sample rate.
struct IQStream {
    std::vector<cpx> samples;
    double sample_rate_hz = 1.0;

    IQStream() = default;
    IQStream(std::vector<cpx> s, double rate) : samples(std::move(s)), sample_rate_hz(rate) {}

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
    double duration_s() const { return static_cast<double>(samples.size()) / sample_rate_hz; }
};

// Mean |x|^2 over the stream (0 for an empty stream).
double mean_power(const IQStream& x);

// Total sum of |x|^2, accumulated in double.
double energy(const IQStream& x);

}  // namespace polyrx
