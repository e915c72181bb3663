#include <doctest.h>

#include <cmath>

#include "polyrx/rng.hpp"
#include "polyrx/waveform.hpp"

using namespace polyrx;

namespace {

IQStream tone(std::size_t n, double rate) {
    IQStream x;
    x.sample_rate_hz = rate;
    x.samples.reserve(n);
    for (std::size_t k = 0; k < n; ++k)
        x.samples.push_back(std::polar(1.0, 2.0 * M_PI * 0.01 * static_cast<double>(k)));
    return x;
}

}  // namespace

TEST_CASE("identity channel passes the stream through") {
    const auto x = tone(500, 1e6);
    const auto y = apply_channel(x, ChannelModel::identity());
    CHECK(y.samples == x.samples);
}

TEST_CASE("channel is deterministic in its seed") {
    const auto x = tone(2000, 1e6);
    auto ch = ChannelModel::nlos(15.0, 42);
    ch.cfo_hz = 300.0;
    ch.random_phase = true;
    const auto y1 = apply_channel(x, ch);
    const auto y2 = apply_channel(x, ch);
    CHECK(y1.samples == y2.samples);

    ch.seed = 43;
    const auto y3 = apply_channel(x, ChannelModel::nlos(15.0, 43));
    CHECK(y1.samples != y3.samples);
}

TEST_CASE("measured SNR tracks the requested SNR within half a dB") {
    // Noise power is measured against the known clean signal.
    const std::size_t n = 100000;
    const auto x = tone(n, 1e6);
    for (double snr_db : {0.0, 10.0, 20.0}) {
        const auto y = apply_channel(x, ChannelModel::awgn(snr_db, 7));
        double sig = 0.0, noise = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            sig += std::norm(x.samples[k]);
            noise += std::norm(y.samples[k] - x.samples[k]);
        }
        const double measured = 10.0 * std::log10(sig / noise);
        CHECK(measured == doctest::Approx(snr_db).epsilon(0.05));
        CHECK(std::abs(measured - snr_db) < 0.5);
    }
}

TEST_CASE("multipath taps convolve causally") {
    ChannelModel ch;
    ch.taps = {cpx(1.0, 0.0), cpx(0.5, 0.0)};
    IQStream x;
    x.sample_rate_hz = 1e6;
    x.samples = {cpx(1, 0), cpx(0, 0), cpx(0, 0)};
    const auto y = apply_channel(x, ch);
    CHECK(std::abs(y.samples[0] - cpx(1.0, 0.0)) < 1e-15);
    CHECK(std::abs(y.samples[1] - cpx(0.5, 0.0)) < 1e-15);
    CHECK(std::abs(y.samples[2]) < 1e-15);
}

TEST_CASE("nlos preset has three unit-energy taps") {
    const auto ch = ChannelModel::nlos(20.0, 9);
    CHECK(ch.taps.size() == 3);
    double e = 0.0;
    for (const auto& t : ch.taps) e += std::norm(t);
    CHECK(e == doctest::Approx(1.0));
    CHECK(std::abs(ch.taps[0]) > std::abs(ch.taps[1]));
    CHECK(std::abs(ch.taps[1]) > std::abs(ch.taps[2]));
}

TEST_CASE("empty taps are rejected") {
    ChannelModel ch;
    ch.taps.clear();
    CHECK_THROWS(apply_channel(tone(10, 1e6), ch));
}
