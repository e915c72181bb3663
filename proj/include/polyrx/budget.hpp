#pragma once

#include <cstdint>

#include "polyrx/rfnet.hpp"

namespace polyrx {

// Real-time feasibility calculus for the classify-then-demodulate pipeline:
// every buffer of B samples triggers one fill + inference + readback round,
// which happens S / (2B) times per second, so the total per-round latency
// must satisfy (t_buf + t_in + t_cn + t_out) * S / (2B) < 1.
struct BudgetInputs {
    double sample_rate_hz = 5e6;    // S
    std::int64_t buffer_samples = 40000;  // B
    double t_buf_s = 0.0;           // DMA fill
    double t_in_s = 0.0;            // input BRAM transfer
    double t_cn_s = 0.0;            // network inference
    double t_out_s = 0.0;           // output readback
    double switch_time_s = 0.0;     // T_sw (informational)

    void validate() const;
};

struct FeasibilityResult {
    bool feasible = false;
    double load = 0.0;   // (t_buf+t_in+t_cn+t_out) * S / (2B); < 1 is feasible
    double slack = 0.0;  // 1 - load
};

FeasibilityResult is_realtime_feasible(const BudgetInputs& b);

// Smallest integer B with B > S * t_cn / 2.
std::int64_t min_buffer_size(double sample_rate_hz, double t_cn_s);

// B / S: one inference must stay valid for at least one buffer.
double min_switch_time_s(std::int64_t buffer_samples, double sample_rate_hz);

// Mean samples demodulated under a stale configuration per parameter switch,
// assuming a uniformly random buffer/switch phase: B / 2.
double expected_misaligned_samples(std::int64_t buffer_samples);

// T_sw * S / B.
double inferences_per_switch(double switch_time_s, std::int64_t buffer_samples,
                             double sample_rate_hz);

// Cycle count of the fully pipelined network: per conv layer the streaming
// fill/prime/output model, plus one cycle per output row of each dense layer
// (output layer included). A lower bound -- memory stalls are not modeled.
std::uint64_t pipelined_cycle_count(const RfnetArch& arch);
double pipelined_latency_estimate_s(const RfnetArch& arch, double clock_hz);

}  // namespace polyrx
