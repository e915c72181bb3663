#include <doctest.h>

#include <cmath>

#include "polyrx/rng.hpp"
#include "polyrx/waveform.hpp"

using namespace polyrx;

namespace {

SingleCarrierConfig sc_cfg(Modulation m, int sps, double shift = 0.0,
                           PulseShape pulse = PulseShape::RootRaisedCosine) {
    SingleCarrierConfig cfg;
    cfg.modulation = m;
    cfg.samples_per_symbol = sps;
    cfg.freq_shift_hz = shift;
    cfg.pulse = pulse;
    return cfg;
}

}  // namespace

TEST_CASE("bpsk with rectangular pulse at sps=1 is the raw constellation") {
    const auto s = modulate_single_carrier({0, 1}, sc_cfg(Modulation::BPSK, 1, 0.0,
                                                          PulseShape::Rectangular), 1e6);
    REQUIRE(s.size() == 2);
    CHECK(s.samples[0] == cpx(1.0, 0.0));
    CHECK(s.samples[1] == cpx(-1.0, 0.0));
}

TEST_CASE("modulate rejects ragged bit counts") {
    CHECK_THROWS(modulate_single_carrier({1, 0, 1}, sc_cfg(Modulation::QPSK, 4), 1e6));
}

TEST_CASE("frequency shift basics") {
    IQStream x;
    x.sample_rate_hz = 1e6;
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) x.samples.push_back(rng.cnormal());

    SUBCASE("zero shift is the identity") {
        const auto y = apply_frequency_shift(x, 0.0);
        CHECK(y.samples == x.samples);
    }
    SUBCASE("quarter-rate rotation of a constant input") {
        IQStream c;
        c.sample_rate_hz = 1e6;
        c.samples.assign(8, cpx(1.0, 0.0));
        const auto y = apply_frequency_shift(c, 2.5e5);
        const cpx expect[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
        for (int k = 0; k < 8; ++k) CHECK(std::abs(y.samples[k] - expect[k % 4]) < 1e-12);
    }
    SUBCASE("energy and per-sample magnitude are preserved") {
        const auto y = apply_frequency_shift(x, 12345.0);
        CHECK(std::abs(energy(y) - energy(x)) <= 1e-9 * energy(x));
        for (std::size_t k = 0; k < x.size(); ++k)
            CHECK(std::abs(std::abs(y.samples[k]) - std::abs(x.samples[k])) < 1e-12);
    }
    SUBCASE("beyond Nyquist is rejected") {
        CHECK_THROWS(apply_frequency_shift(x, 6e5));
    }
}

TEST_CASE("single carrier loopback is exact for all modulations and pulses") {
    Rng rng(21);
    for (Modulation m : {Modulation::BPSK, Modulation::QPSK, Modulation::PSK8, Modulation::QAM16,
                         Modulation::QAM32, Modulation::QAM64}) {
        for (PulseShape pulse : {PulseShape::RootRaisedCosine, PulseShape::Rectangular}) {
            for (double shift : {0.0, 1000.0}) {
                const auto cfg = sc_cfg(m, 10, shift, pulse);
                const auto bits = rng.bits(static_cast<std::size_t>(bits_per_symbol(m)) * 64);
                const auto s = modulate_single_carrier(bits, cfg, 1e6);
                CHECK(demodulate_single_carrier(s, cfg) == bits);
            }
        }
    }
}

TEST_CASE("loopback at sps=1 uses the rectangular pulse") {
    Rng rng(22);
    const auto cfg = sc_cfg(Modulation::QAM16, 1, 0.0, PulseShape::Rectangular);
    const auto bits = rng.bits(4 * 40);
    CHECK(demodulate_single_carrier(modulate_single_carrier(bits, cfg, 1e6), cfg) == bits);
    // The RRC needs at least 2 samples per symbol to stay below Nyquist.
    CHECK_THROWS(modulate_single_carrier(bits, sc_cfg(Modulation::QAM16, 1), 1e6));
}

TEST_CASE("empty stream demodulates to no bits") {
    IQStream empty;
    empty.sample_rate_hz = 1e6;
    CHECK(demodulate_single_carrier(empty, sc_cfg(Modulation::QPSK, 4)).empty());
}

TEST_CASE("demodulating QPSK as BPSK yields chance-level bit agreement") {
    Rng rng(23);
    const int n_bits = 20000;
    const auto bits = rng.bits(n_bits);
    const auto qpsk = sc_cfg(Modulation::QPSK, 4);
    const auto bpsk = sc_cfg(Modulation::BPSK, 4);
    const auto s = modulate_single_carrier(bits, qpsk, 1e6);
    const auto got = demodulate_single_carrier(s, bpsk);
    REQUIRE(got.size() >= 9000);
    std::size_t agree = 0;
    for (std::size_t i = 0; i < got.size(); ++i)
        if (got[i] == bits[i]) ++agree;
    const double ber = 1.0 - static_cast<double>(agree) / got.size();
    CHECK(ber == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("64-QAM at 30 dB has symbol error rate well under 1e-3") {
    Rng rng(24);
    const auto cfg = sc_cfg(Modulation::QAM64, 2);
    const int n_sym = 100000;
    const auto bits = rng.bits(static_cast<std::size_t>(6) * n_sym);
    auto s = modulate_single_carrier(bits, cfg, 1e6);
    s = apply_channel(s, ChannelModel::awgn(30.0, 77));
    const auto got = demodulate_single_carrier(s, cfg);
    REQUIRE(got.size() == bits.size());
    int sym_err = 0;
    for (int k = 0; k < n_sym; ++k) {
        bool bad = false;
        for (int b = 0; b < 6; ++b)
            if (got[6 * k + b] != bits[6 * k + b]) bad = true;
        if (bad) ++sym_err;
    }
    CHECK(static_cast<double>(sym_err) / n_sym < 1e-3);
}
