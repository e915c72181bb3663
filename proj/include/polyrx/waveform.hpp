#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "polyrx/constellation.hpp"
#include "polyrx/iq.hpp"
#include "polyrx/rng.hpp"

namespace polyrx {

enum class PulseShape { RootRaisedCosine, Rectangular };

// Root-raised-cosine parameters used by every RRC pulse in the project.
inline constexpr double kRrcRolloff = 0.35;
inline constexpr int kRrcSpanSymbols = 8;  // total span, symbols

struct SingleCarrierConfig {
    Modulation modulation = Modulation::BPSK;
    int samples_per_symbol = 1;
    double freq_shift_hz = 0.0;
    PulseShape pulse = PulseShape::RootRaisedCosine;

    void validate() const;
    bool operator==(const SingleCarrierConfig&) const = default;
};

struct OfdmConfig {
    int fft_size = 64;
    Modulation bin_modulation = Modulation::QPSK;  // BPSK/QPSK/PSK8 only
    int cp_len = 16;
    std::vector<int> occupied_bins;  // ascending, DC (bin 0) excluded

    int symbol_len() const { return fft_size + cp_len; }
    void validate() const;
    bool operator==(const OfdmConfig&) const = default;

    // cp = fft/4 and all bins occupied except DC.
    static OfdmConfig standard(int fft_size, Modulation bin_mod);
    // cp = fft/4 and bins 1..n_occupied occupied.
    static OfdmConfig with_bins(int fft_size, Modulation bin_mod, int n_occupied);
};

using PhyConfig = std::variant<SingleCarrierConfig, OfdmConfig>;

// Payload bits carried by one full symbol of the configuration.
int config_bits_per_symbol(const PhyConfig& cfg);

// Linear channel emulator: FIR multipath, carrier frequency offset, optional
// uniform random carrier phase, then AWGN at snr_db relative to the measured
// signal power. Fully determined by `seed`.
struct ChannelModel {
    double snr_db = kNoNoise;  // >= kNoNoise means noiseless
    double cfo_hz = 0.0;
    std::vector<cpx> taps = {cpx(1.0, 0.0)};
    std::uint64_t seed = 0;
    bool random_phase = false;

    static constexpr double kNoNoise = 1e30;

    void validate() const;
    static ChannelModel identity();
    static ChannelModel awgn(double snr_db, std::uint64_t seed);
    // 3-tap FIR with exponentially decaying magnitudes and seeded random
    // phases, emulating a cluttered non-line-of-sight path.
    static ChannelModel nlos(double snr_db, std::uint64_t seed);
};

// Grid of constellation symbols feeding/coming from the OFDM transforms:
// n_symbols rows by n_bins columns (one column per occupied bin).
struct SymbolGrid {
    std::size_t n_symbols = 0;
    std::size_t n_bins = 0;
    std::vector<cpx> data;  // row-major

    cpx& at(std::size_t sym, std::size_t bin) { return data[sym * n_bins + bin]; }
    const cpx& at(std::size_t sym, std::size_t bin) const { return data[sym * n_bins + bin]; }
};

// ---------------------------------------------------------------------------
// Single carrier
// ---------------------------------------------------------------------------

// Gray-mapped unit-average-energy symbols, upsampled by samples_per_symbol,
// pulse-shaped, then shifted by cfg.freq_shift_hz.
//
// RRC framing: the output carries the full pulse tails, so its length is
// n_symbols * sps + kRrcSpanSymbols * sps and the matched-filter peak of
// symbol k sits at sample k * sps + (kRrcSpanSymbols / 2) * sps.
// Rectangular framing: sample-and-hold, length n_symbols * sps, symbol k
// occupies samples [k*sps, (k+1)*sps).
IQStream modulate_single_carrier(const std::vector<std::uint8_t>& bits,
                                 const SingleCarrierConfig& cfg, double sample_rate_hz);

// y[k] = x[k] * exp(j 2 pi shift k / S). |shift| must stay below Nyquist.
IQStream apply_frequency_shift(const IQStream& x, double shift_hz);

// Inverse of modulate_single_carrier on a noiseless stream: undoes the
// frequency shift, matched-filters, decimates to one sample per symbol and
// hard-demaps. `phase_ref_offset` is the index distance from the reference
// point of cfg.freq_shift_hz (i.e. where the segment carrying x started);
// it matters only for streams cut mid-segment.
std::vector<std::uint8_t> demodulate_single_carrier(const IQStream& x,
                                                    const SingleCarrierConfig& cfg,
                                                    std::size_t phase_ref_offset = 0);

// Number of symbols demodulate_single_carrier will decide for a stream of
// `n_samples` samples.
std::size_t sc_symbol_capacity(std::size_t n_samples, const SingleCarrierConfig& cfg);

// ---------------------------------------------------------------------------
// OFDM
// ---------------------------------------------------------------------------

// Per OFDM symbol: place grid row on the occupied bins, inverse FFT, prepend
// the cyclic prefix. Output is scaled for unit average power and has length
// grid.n_symbols * (fft_size + cp_len).
IQStream ofdm_modulate(const SymbolGrid& grid, const OfdmConfig& cfg, double sample_rate_hz);

// Strips CPs starting at sync_offset, forward FFT, extracts occupied bins.
// A trailing partial symbol is discarded; a stream shorter than one whole
// symbol is an InsufficientDataError.
SymbolGrid ofdm_demodulate(const IQStream& x, const OfdmConfig& cfg, std::size_t sync_offset);

// ---------------------------------------------------------------------------
// Channel and schedules
// ---------------------------------------------------------------------------

IQStream apply_channel(const IQStream& x, const ChannelModel& ch);

struct ScheduleEntry {
    PhyConfig config;
    int label = 0;
};

// Timed sequence of physical-layer configurations; the transmitter holds
// each entry for exactly switch_time_s.
struct TransmitterSchedule {
    std::vector<ScheduleEntry> entries;
    double switch_time_s = 0.25;
    double sample_rate_hz = 5e6;

    std::size_t segment_len() const;  // round(switch_time_s * sample_rate_hz)
    void validate() const;
};

struct LabelSpan {
    std::size_t start = 0;
    int label = 0;
};

// Ground-truth track of a synthesized schedule stream. payload_seed
// regenerates every segment's payload bits (segment i uses fork(i)).
struct LabelTrack {
    std::vector<LabelSpan> spans;
    std::uint64_t payload_seed = 0;
};

// Number of payload symbols a config can carry in a segment of `seg_len`
// samples (RRC tails and partial symbols excluded).
std::size_t segment_symbol_count(const PhyConfig& cfg, std::size_t seg_len);
std::size_t segment_payload_bits(const PhyConfig& cfg, std::size_t seg_len);

// Deterministic payload bits of segment `index` under `track`.
std::vector<std::uint8_t> segment_payload(const LabelTrack& track, std::size_t index,
                                          const PhyConfig& cfg, std::size_t seg_len);

// Synthesizes one segment of exactly seg_len samples for `cfg` carrying
// `bits` (zero-padded tail).
std::vector<cpx> render_segment(const PhyConfig& cfg, const std::vector<std::uint8_t>& bits,
                                std::size_t seg_len, double sample_rate_hz);

// Concatenates per-entry segments of exactly round(T_sw * S) samples each
// with seeded random payloads; the label track marks each segment start.
std::pair<IQStream, LabelTrack> generate_schedule_stream(const TransmitterSchedule& sched,
                                                         std::uint64_t payload_seed);

}  // namespace polyrx
