#include "polyrx/budget.hpp"

#include <cmath>

#include "polyrx/errors.hpp"

namespace polyrx {

void BudgetInputs::validate() const {
    if (sample_rate_hz <= 0.0) throw ParamError("sample_rate_hz must be > 0");
    if (buffer_samples < 1) throw ParamError("buffer_samples must be >= 1");
    if (t_buf_s < 0.0 || t_in_s < 0.0 || t_cn_s < 0.0 || t_out_s < 0.0 || switch_time_s < 0.0)
        throw ParamError("latencies must be nonnegative");
}

FeasibilityResult is_realtime_feasible(const BudgetInputs& b) {
    b.validate();
    const double total = b.t_buf_s + b.t_in_s + b.t_cn_s + b.t_out_s;
    FeasibilityResult r;
    r.load = total * b.sample_rate_hz / (2.0 * static_cast<double>(b.buffer_samples));
    r.slack = 1.0 - r.load;
    r.feasible = r.load < 1.0;
    return r;
}

std::int64_t min_buffer_size(double sample_rate_hz, double t_cn_s) {
    if (sample_rate_hz <= 0.0 || t_cn_s <= 0.0)
        throw ParamError("min_buffer_size needs positive inputs");
    const double bound = sample_rate_hz * t_cn_s / 2.0;
    // Smallest integer strictly greater than the bound.
    return static_cast<std::int64_t>(std::floor(bound)) + 1;
}

double min_switch_time_s(std::int64_t buffer_samples, double sample_rate_hz) {
    if (buffer_samples < 1 || sample_rate_hz <= 0.0)
        throw ParamError("min_switch_time needs positive inputs");
    return static_cast<double>(buffer_samples) / sample_rate_hz;
}

double expected_misaligned_samples(std::int64_t buffer_samples) {
    if (buffer_samples < 1) throw ParamError("buffer_samples must be >= 1");
    return static_cast<double>(buffer_samples) / 2.0;
}

double inferences_per_switch(double switch_time_s, std::int64_t buffer_samples,
                             double sample_rate_hz) {
    if (switch_time_s <= 0.0 || buffer_samples < 1 || sample_rate_hz <= 0.0)
        throw ParamError("inferences_per_switch needs positive inputs");
    return switch_time_s * sample_rate_hz / static_cast<double>(buffer_samples);
}

std::uint64_t pipelined_cycle_count(const RfnetArch& arch) {
    arch.validate();
    std::uint64_t cycles = 0;
    int w = arch.input_w, h = arch.input_h;
    for (int l = 0; l < arch.m; ++l) {
        const std::uint64_t out_w = static_cast<std::uint64_t>(w - arch.f + 1);
        const std::uint64_t out_h = static_cast<std::uint64_t>(h - arch.f + 1);
        // Line-buffer fill, window prime, then one window per cycle.
        cycles += static_cast<std::uint64_t>(arch.f) * static_cast<std::uint64_t>(w);
        cycles += static_cast<std::uint64_t>(arch.f);
        cycles += out_w * out_h;
        w -= arch.f - 1;
        h -= arch.f - 1;
    }
    // One MAC row per cycle in the dense stack (output layer included).
    for (int d : arch.dense_units) cycles += static_cast<std::uint64_t>(d);
    cycles += static_cast<std::uint64_t>(arch.n_classes);
    return cycles;
}

double pipelined_latency_estimate_s(const RfnetArch& arch, double clock_hz) {
    if (clock_hz <= 0.0) throw ParamError("clock_hz must be > 0");
    return static_cast<double>(pipelined_cycle_count(arch)) / clock_hz;
}

}  // namespace polyrx
