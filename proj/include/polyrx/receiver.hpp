#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "polyrx/rfnet.hpp"
#include "polyrx/waveform.hpp"

namespace polyrx {

// Dense class-index -> physical-layer-config table for one experiment.
struct ClassCatalog {
    std::vector<PhyConfig> configs;
    std::vector<std::string> names;

    int n_classes() const { return static_cast<int>(configs.size()); }
    void validate() const;

    // 6 modulations x frequency shifts {0, 1, 2} kHz, ordered by modulation
    // then shift ("BPSK 0kHz", "BPSK 1kHz", ..., "QAM64 2kHz").
    static ClassCatalog single_carrier_18(int samples_per_symbol,
                                          PulseShape pulse = PulseShape::RootRaisedCosine,
                                          double shift_step_hz = 1000.0);

    // FFT {64, 128, 256} x bin modulations {BPSK, QPSK, PSK8}, ordered by
    // FFT size then modulation. n_occupied = 0 occupies every non-DC bin.
    static ClassCatalog ofdm_9(int n_occupied = 0);
};

// Classifies the buffer starting at `buf_start`; returns a class index.
// Model-backed classifiers look at the first w*h samples of the buffer;
// stubs may look at the truth track instead.
using Classifier = std::function<int(const IQStream& stream, std::size_t buf_start,
                                     std::size_t buf_len)>;

// Tensor from the buffer head (offset 0 within the buffer) through the
// configured forward pass.
ClassPrediction classify_buffer(const IQStream& stream, std::size_t buf_start,
                                std::size_t buf_len, const RfnetModel& model, InferenceMode mode);

Classifier model_classifier(const RfnetModel& model, InferenceMode mode);
// Returns the true label of the buffer's first sample.
Classifier perfect_classifier(const LabelTrack& truth);
// Returns (true label + 1) mod n_classes.
Classifier always_wrong_classifier(const LabelTrack& truth, int n_classes);

struct ReceiverRun {
    std::size_t buffer_samples = 250000;
    Classifier classifier;
};

struct ClassReportRow {
    int label = -1;  // -1 marks the totals row
    std::string config_name;
    std::uint64_t buffers = 0;          // buffers whose head sample is this class
    std::uint64_t buffers_correct = 0;  // of those, classified as this class
    std::uint64_t bits_demodulated = 0;
    std::uint64_t bits_correct = 0;
    double throughput_bps = 0.0;
    double oracle_throughput_bps = 0.0;  // filled by attach_oracle
    double ratio = 0.0;                  // poly / oracle throughput
};

struct ThroughputReport {
    std::vector<ClassReportRow> per_class;
    ClassReportRow total;
    double duration_s = 0.0;
    double classification_accuracy = 0.0;
    // Samples that were assigned to a configuration other than the one that
    // produced them (boundary exposure).
    std::uint64_t misassigned_samples = 0;

    std::string to_csv() const;
    std::string to_json() const;
};

// Polymorphic receiver: walks consecutive buffers of buffer_samples over
// [window_start, window_start + n_buffers * B), classifies each buffer,
// demodulates every buffer under its classified configuration and scores the
// recovered bits against the known payloads. Exactly one demodulation chain
// is active per buffer; regions demodulated under a configuration that does
// not match the transmitted one score zero correct bits. Runs of adjacent
// same-class buffers are demodulated as one continuous stream. A trailing
// partial buffer is dropped.
ThroughputReport poly_receive(const IQStream& stream, const LabelTrack& truth,
                              const ReceiverRun& run, const ClassCatalog& catalog,
                              std::size_t window_start = 0);

// Perfect-knowledge baseline: demodulates every sample with the true
// configuration from the label track. `window_end` = 0 means stream end;
// pass the poly window bounds to make the two reports comparable.
ThroughputReport oracle_receive(const IQStream& stream, const LabelTrack& truth,
                                const ClassCatalog& catalog, std::size_t window_start = 0,
                                std::size_t window_end = 0);

// Fills oracle_throughput_bps and ratio columns of `poly` from `oracle`.
void attach_oracle(ThroughputReport& poly, const ThroughputReport& oracle);

// rows = truth, columns = prediction.
std::vector<std::vector<std::uint64_t>> confusion_matrix(const RfnetModel& model,
                                                         InferenceMode mode,
                                                         const std::vector<RfTensor>& inputs,
                                                         const std::vector<int>& labels);

std::string confusion_to_csv(const std::vector<std::vector<std::uint64_t>>& cm,
                             const std::vector<std::string>& names);

// ---------------------------------------------------------------------------
// End-to-end simulation driver (one seed)
// ---------------------------------------------------------------------------

struct SimulationSpec {
    ClassCatalog catalog;
    double sample_rate_hz = 5e6;
    double switch_time_s = 0.25;
    int n_entries = 12;
    std::size_t buffer_samples = 250000;
    ChannelModel channel = ChannelModel::identity();
    std::uint64_t seed = 0;
    bool oracle_only = false;
};

struct SimulationOutcome {
    ThroughputReport poly;
    ThroughputReport oracle;
    double ratio = 0.0;  // total poly/oracle throughput
};

// Draws a pseudo-random schedule (adjacent entries always differ), renders
// the stream, applies the channel, starts the receiver at a random phase in
// [0, B) and runs both receivers over the same window.
SimulationOutcome run_simulation(const SimulationSpec& spec, const Classifier& classifier);

}  // namespace polyrx
