#include <doctest.h>

#include <cmath>

#include "polyrx/budget.hpp"
#include "polyrx/rng.hpp"

using namespace polyrx;

TEST_CASE("feasibility load for the measured operating points") {
    BudgetInputs b;
    b.sample_rate_hz = 5e6;
    b.buffer_samples = 250000;
    b.t_cn_s = 0.017;
    const auto r = is_realtime_feasible(b);
    CHECK(r.feasible);
    CHECK(r.load == doctest::Approx(0.17));

    b.t_cn_s = 0.0;
    const auto zero = is_realtime_feasible(b);
    CHECK(zero.feasible);
    CHECK(zero.load == 0.0);
    CHECK(zero.slack == 1.0);

    // The exact boundary t_cn = 2B/S is infeasible.
    b.t_cn_s = 2.0 * 250000 / 5e6;
    const auto edge = is_realtime_feasible(b);
    CHECK_FALSE(edge.feasible);
    CHECK(edge.load == doctest::Approx(1.0));
}

TEST_CASE("feasibility boundary is strict") {
    BudgetInputs b;
    b.sample_rate_hz = 5e6;
    b.buffer_samples = 100000;
    const double bound = 2.0 * static_cast<double>(b.buffer_samples) / b.sample_rate_hz;
    for (double eps : {1e-6, 1e-4, 1e-2}) {
        b.t_cn_s = bound - eps * bound;
        CHECK(is_realtime_feasible(b).feasible);
    }
    b.t_cn_s = bound;
    CHECK_FALSE(is_realtime_feasible(b).feasible);
}

TEST_CASE("minimum buffer size for the measured inference latency") {
    // 5 MS/s and 16 ms of inference need strictly more than 40000 samples.
    CHECK(min_buffer_size(5e6, 0.016) == 40001);
    CHECK(min_buffer_size(10e6, 0.008) == 40001);
    CHECK(min_buffer_size(5e6, 1e-9) == 1);
    CHECK_THROWS(min_buffer_size(0.0, 0.01));
}

TEST_CASE("minimum switch time") {
    CHECK(min_switch_time_s(40000, 5e6) == doctest::Approx(0.008));
    CHECK(min_switch_time_s(5000000, 5e6) == doctest::Approx(1.0));
    CHECK(min_switch_time_s(250000, 5e6) == doctest::Approx(0.05));
}

TEST_CASE("monotonicity of the sizing rules") {
    std::int64_t prev = 0;
    for (double t : {0.001, 0.002, 0.004, 0.008, 0.016}) {
        const std::int64_t b = min_buffer_size(5e6, t);
        CHECK(b >= prev);
        prev = b;
    }
    double prev_t = 0.0;
    for (std::int64_t b : {1000ll, 10000ll, 100000ll}) {
        const double t = min_switch_time_s(b, 5e6);
        CHECK(t >= prev_t);
        prev_t = t;
    }
}

TEST_CASE("expected misalignment is half a buffer") {
    CHECK(expected_misaligned_samples(250000) == 125000.0);
    CHECK(expected_misaligned_samples(2) == 1.0);
}

// Boundary-phase Monte-Carlo oracle: a switch lands at a uniformly random
// phase inside a buffer; the samples demodulated under the stale
// configuration average B/2.
TEST_CASE("misalignment law matches a boundary-phase simulation") {
    const std::int64_t B = 50000;
    Rng rng(55);
    double total = 0.0;
    const int trials = 20000;
    for (int i = 0; i < trials; ++i) {
        const double phase = rng.uniform(0.0, static_cast<double>(B));
        total += static_cast<double>(B) - phase;  // stale tail of the straddling buffer
    }
    const double mean = total / trials;
    CHECK(std::abs(mean - expected_misaligned_samples(B)) <
          0.02 * expected_misaligned_samples(B));
}

TEST_CASE("inferences per switch") {
    CHECK(inferences_per_switch(0.25, 250000, 5e6) == doctest::Approx(5.0));
    CHECK(inferences_per_switch(0.008, 40000, 5e6) == doctest::Approx(1.0));
    CHECK(inferences_per_switch(0.05, 250000, 5e6) == doctest::Approx(1.0));
    // Identity: inferences * B = T_sw * S exactly.
    CHECK(inferences_per_switch(0.25, 250000, 5e6) * 250000 == doctest::Approx(0.25 * 5e6));
}

TEST_CASE("pipelined cycle model") {
    RfnetArch arch;
    arch.m = 1;
    arch.conv_filters = {1};
    arch.f = 3;
    arch.input_w = 4;
    arch.input_h = 4;
    arch.n_classes = 2;
    // 12 fill + 3 window prime + 4 windows, then one row per output class.
    CHECK(pipelined_cycle_count(arch) == 12u + 3u + 4u + 2u);

    const double at100 = pipelined_latency_estimate_s(arch, 100e6);
    const double at200 = pipelined_latency_estimate_s(arch, 200e6);
    CHECK(at100 == doctest::Approx(2.0 * at200));

    // The paper-scale model is strictly cheaper than the measured 8.077 ms
    // at a 100 MHz fabric clock (the estimate excludes memory stalls).
    RfnetArch paper;
    paper.m = 1;
    paper.conv_filters = {25};
    paper.f = 3;
    paper.input_w = 20;
    paper.input_h = 20;
    paper.n_classes = 18;
    CHECK(pipelined_latency_estimate_s(paper, 100e6) < 0.008077);
}
