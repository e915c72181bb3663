#include "polyrx/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "polyrx/errors.hpp"
#include "polyrx/fft.hpp"

namespace polyrx {

namespace {

// Root-raised-cosine taps over the full span, one tap per sample,
// normalized so the tap energy equals samples_per_symbol. With that scale
// the transmit stream has ~unit average power and the matched-filter gain
// is exactly the tap energy.
std::vector<double> rrc_taps(int sps) {
    const double a = kRrcRolloff;
    const int half = kRrcSpanSymbols * sps / 2;
    std::vector<double> h(static_cast<std::size_t>(2 * half) + 1);
    for (int m = -half; m <= half; ++m) {
        const double t = static_cast<double>(m) / sps;
        double v;
        if (m == 0) {
            v = 1.0 - a + 4.0 * a / M_PI;
        } else if (std::abs(std::abs(t) - 1.0 / (4.0 * a)) < 1e-9) {
            v = (a / std::sqrt(2.0)) * ((1.0 + 2.0 / M_PI) * std::sin(M_PI / (4.0 * a)) +
                                        (1.0 - 2.0 / M_PI) * std::cos(M_PI / (4.0 * a)));
        } else {
            const double num = std::sin(M_PI * t * (1.0 - a)) +
                               4.0 * a * t * std::cos(M_PI * t * (1.0 + a));
            const double den = M_PI * t * (1.0 - 16.0 * a * a * t * t);
            v = num / den;
        }
        h[static_cast<std::size_t>(m + half)] = v;
    }
    double e = 0.0;
    for (double v : h) e += v * v;
    const double scale = std::sqrt(static_cast<double>(sps) / e);
    for (double& v : h) v *= scale;
    return h;
}

struct RrcCache {
    int sps = 0;
    std::vector<double> taps;
};

const std::vector<double>& cached_rrc(int sps) {
    thread_local RrcCache cache;
    if (cache.sps != sps) {
        cache.taps = rrc_taps(sps);
        cache.sps = sps;
    }
    return cache.taps;
}

void shift_inplace(std::vector<cpx>& samples, double shift_hz, double sample_rate_hz,
                   std::size_t phase_ref_offset) {
    if (shift_hz == 0.0) return;
    const double w = 2.0 * M_PI * shift_hz / sample_rate_hz;
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const double ang = w * static_cast<double>(k + phase_ref_offset);
        samples[k] *= cpx(std::cos(ang), std::sin(ang));
    }
}

}  // namespace

void SingleCarrierConfig::validate() const {
    if (samples_per_symbol < 1) throw ParamError("samples_per_symbol must be >= 1");
    // The RRC occupies (1+rolloff)/2 of the symbol rate per side; one sample
    // per symbol undersamples it and the matched filter aliases.
    if (pulse == PulseShape::RootRaisedCosine && samples_per_symbol < 2)
        throw ParamError("root-raised-cosine shaping needs samples_per_symbol >= 2");
}

void OfdmConfig::validate() const {
    if (!is_pow2(static_cast<std::size_t>(fft_size)) || fft_size < 4)
        throw ParamError("fft_size must be a power of two >= 4");
    if (cp_len < 0 || cp_len >= fft_size) throw ParamError("cp_len must be in [0, fft_size)");
    if (occupied_bins.empty()) throw ParamError("occupied_bins must be non-empty");
    int prev = -1;
    for (int b : occupied_bins) {
        if (b <= prev) throw ParamError("occupied_bins must be strictly ascending");
        if (b == 0) throw ParamError("DC bin cannot be occupied");
        if (b < 0 || b >= fft_size) throw ParamError("occupied bin out of range");
        prev = b;
    }
    switch (bin_modulation) {
        case Modulation::BPSK:
        case Modulation::QPSK:
        case Modulation::PSK8:
            break;
        default:
            throw ParamError("OFDM bin modulation must be BPSK/QPSK/8PSK");
    }
}

OfdmConfig OfdmConfig::standard(int fft_size, Modulation bin_mod) {
    OfdmConfig cfg;
    cfg.fft_size = fft_size;
    cfg.bin_modulation = bin_mod;
    cfg.cp_len = fft_size / 4;
    cfg.occupied_bins.resize(static_cast<std::size_t>(fft_size) - 1);
    std::iota(cfg.occupied_bins.begin(), cfg.occupied_bins.end(), 1);
    cfg.validate();
    return cfg;
}

OfdmConfig OfdmConfig::with_bins(int fft_size, Modulation bin_mod, int n_occupied) {
    if (n_occupied <= 0 || n_occupied >= fft_size)
        throw ParamError("n_occupied must be in [1, fft_size)");
    OfdmConfig cfg;
    cfg.fft_size = fft_size;
    cfg.bin_modulation = bin_mod;
    cfg.cp_len = fft_size / 4;
    cfg.occupied_bins.resize(static_cast<std::size_t>(n_occupied));
    std::iota(cfg.occupied_bins.begin(), cfg.occupied_bins.end(), 1);
    cfg.validate();
    return cfg;
}

int config_bits_per_symbol(const PhyConfig& cfg) {
    if (const auto* sc = std::get_if<SingleCarrierConfig>(&cfg))
        return bits_per_symbol(sc->modulation);
    const auto& of = std::get<OfdmConfig>(cfg);
    return bits_per_symbol(of.bin_modulation) * static_cast<int>(of.occupied_bins.size());
}

void ChannelModel::validate() const {
    if (taps.empty()) throw ParamError("channel taps must be non-empty");
}

ChannelModel ChannelModel::identity() { return ChannelModel{}; }

ChannelModel ChannelModel::awgn(double snr_db, std::uint64_t seed) {
    ChannelModel ch;
    ch.snr_db = snr_db;
    ch.seed = seed;
    return ch;
}

ChannelModel ChannelModel::nlos(double snr_db, std::uint64_t seed) {
    ChannelModel ch;
    ch.snr_db = snr_db;
    ch.seed = seed;
    Rng rng(seed);
    ch.taps.clear();
    double mag = 1.0;
    for (int i = 0; i < 3; ++i) {
        const double phase = (i == 0) ? 0.0 : rng.uniform(0.0, 2.0 * M_PI);
        ch.taps.push_back(std::polar(mag, phase));
        mag *= 0.4;
    }
    // Keep unit gain so snr_db stays relative to the transmit power.
    double e = 0.0;
    for (const cpx& t : ch.taps) e += std::norm(t);
    for (cpx& t : ch.taps) t /= std::sqrt(e);
    return ch;
}

// ---------------------------------------------------------------------------
// Single carrier
// ---------------------------------------------------------------------------

IQStream modulate_single_carrier(const std::vector<std::uint8_t>& bits,
                                 const SingleCarrierConfig& cfg, double sample_rate_hz) {
    cfg.validate();
    if (sample_rate_hz <= 0.0) throw ParamError("sample_rate_hz must be > 0");
    const std::vector<cpx> symbols = symbols_from_bits(cfg.modulation, bits);
    const int sps = cfg.samples_per_symbol;

    IQStream out;
    out.sample_rate_hz = sample_rate_hz;
    if (cfg.pulse == PulseShape::Rectangular) {
        out.samples.assign(symbols.size() * static_cast<std::size_t>(sps), cpx(0.0, 0.0));
        for (std::size_t k = 0; k < symbols.size(); ++k)
            for (int j = 0; j < sps; ++j) out.samples[k * sps + j] = symbols[k];
    } else {
        const auto& h = cached_rrc(sps);
        const std::size_t span_samples = static_cast<std::size_t>(kRrcSpanSymbols) * sps;
        out.samples.assign(symbols.size() * sps + span_samples, cpx(0.0, 0.0));
        // Symbol k's pulse occupies [k*sps, k*sps + span_samples]; its
        // matched-filter peak lands at k*sps + span_samples/2.
        for (std::size_t k = 0; k < symbols.size(); ++k) {
            const cpx s = symbols[k];
            cpx* dst = out.samples.data() + k * sps;
            for (std::size_t m = 0; m < h.size(); ++m) dst[m] += s * h[m];
        }
    }
    shift_inplace(out.samples, cfg.freq_shift_hz, sample_rate_hz, 0);
    return out;
}

IQStream apply_frequency_shift(const IQStream& x, double shift_hz) {
    if (std::abs(shift_hz) >= x.sample_rate_hz / 2.0)
        throw ParamError("frequency shift beyond Nyquist");
    if (shift_hz == 0.0) return x;
    IQStream y = x;
    shift_inplace(y.samples, shift_hz, x.sample_rate_hz, 0);
    return y;
}

std::size_t sc_symbol_capacity(std::size_t n_samples, const SingleCarrierConfig& cfg) {
    const std::size_t sps = static_cast<std::size_t>(cfg.samples_per_symbol);
    if (cfg.pulse == PulseShape::Rectangular) return n_samples / sps;
    const std::size_t span_samples = static_cast<std::size_t>(kRrcSpanSymbols) * sps;
    if (n_samples < span_samples + 1) return 0;
    return (n_samples - span_samples - 1) / sps + 1;
}

std::vector<std::uint8_t> demodulate_single_carrier(const IQStream& x,
                                                    const SingleCarrierConfig& cfg,
                                                    std::size_t phase_ref_offset) {
    cfg.validate();
    const std::size_t n_sym = sc_symbol_capacity(x.samples.size(), cfg);
    if (n_sym == 0) return {};

    std::vector<cpx> base = x.samples;
    if (cfg.freq_shift_hz != 0.0)
        shift_inplace(base, -cfg.freq_shift_hz, x.sample_rate_hz, phase_ref_offset);

    const int sps = cfg.samples_per_symbol;
    std::vector<cpx> decided(n_sym);
    if (cfg.pulse == PulseShape::Rectangular) {
        for (std::size_t k = 0; k < n_sym; ++k) {
            cpx acc(0.0, 0.0);
            for (int j = 0; j < sps; ++j) acc += base[k * sps + j];
            decided[k] = acc / static_cast<double>(sps);
        }
    } else {
        const auto& h = cached_rrc(sps);
        double gain = 0.0;
        for (double v : h) gain += v * v;
        for (std::size_t k = 0; k < n_sym; ++k) {
            cpx acc(0.0, 0.0);
            const cpx* src = base.data() + k * sps;
            for (std::size_t m = 0; m < h.size(); ++m) acc += src[m] * h[m];
            decided[k] = acc / gain;
        }
    }
    return bits_from_symbols(cfg.modulation, decided);
}

// ---------------------------------------------------------------------------
// OFDM
// ---------------------------------------------------------------------------

IQStream ofdm_modulate(const SymbolGrid& grid, const OfdmConfig& cfg, double sample_rate_hz) {
    cfg.validate();
    if (grid.n_bins != cfg.occupied_bins.size())
        throw ShapeError("grid width " + std::to_string(grid.n_bins) +
                         " does not match occupied bin count " +
                         std::to_string(cfg.occupied_bins.size()));
    const std::size_t n = static_cast<std::size_t>(cfg.fft_size);
    const std::size_t sym_len = static_cast<std::size_t>(cfg.symbol_len());
    // IFFT scaled for ~unit average transmit power.
    const double scale = static_cast<double>(cfg.fft_size) /
                         std::sqrt(static_cast<double>(cfg.occupied_bins.size()));

    IQStream out;
    out.sample_rate_hz = sample_rate_hz;
    out.samples.resize(grid.n_symbols * sym_len);
    std::vector<cpx> spectrum(n);
    for (std::size_t s = 0; s < grid.n_symbols; ++s) {
        std::fill(spectrum.begin(), spectrum.end(), cpx(0.0, 0.0));
        for (std::size_t b = 0; b < grid.n_bins; ++b)
            spectrum[static_cast<std::size_t>(cfg.occupied_bins[b])] = grid.at(s, b);
        fft_inplace(spectrum, true);
        cpx* dst = out.samples.data() + s * sym_len;
        for (std::size_t i = 0; i < static_cast<std::size_t>(cfg.cp_len); ++i)
            dst[i] = spectrum[n - cfg.cp_len + i] * scale;
        for (std::size_t i = 0; i < n; ++i) dst[cfg.cp_len + i] = spectrum[i] * scale;
        // Spectrum was consumed by the in-place transform; rebuild next loop.
    }
    return out;
}

SymbolGrid ofdm_demodulate(const IQStream& x, const OfdmConfig& cfg, std::size_t sync_offset) {
    cfg.validate();
    const std::size_t sym_len = static_cast<std::size_t>(cfg.symbol_len());
    if (x.samples.size() < sync_offset + sym_len)
        throw InsufficientDataError("stream shorter than one OFDM symbol");
    const std::size_t n_sym = (x.samples.size() - sync_offset) / sym_len;
    const std::size_t n = static_cast<std::size_t>(cfg.fft_size);
    const double scale = std::sqrt(static_cast<double>(cfg.occupied_bins.size())) /
                         static_cast<double>(cfg.fft_size);

    SymbolGrid grid;
    grid.n_symbols = n_sym;
    grid.n_bins = cfg.occupied_bins.size();
    grid.data.resize(n_sym * grid.n_bins);
    std::vector<cpx> buf(n);
    for (std::size_t s = 0; s < n_sym; ++s) {
        const cpx* src = x.samples.data() + sync_offset + s * sym_len + cfg.cp_len;
        std::copy(src, src + n, buf.begin());
        fft_inplace(buf, false);
        for (std::size_t b = 0; b < grid.n_bins; ++b)
            grid.at(s, b) = buf[static_cast<std::size_t>(cfg.occupied_bins[b])] * scale;
    }
    return grid;
}

// ---------------------------------------------------------------------------
// Channel
// ---------------------------------------------------------------------------

IQStream apply_channel(const IQStream& x, const ChannelModel& ch) {
    ch.validate();
    IQStream y;
    y.sample_rate_hz = x.sample_rate_hz;
    const std::size_t n = x.samples.size();
    y.samples.resize(n);

    // Causal FIR, output truncated to the input length.
    if (ch.taps.size() == 1) {
        for (std::size_t i = 0; i < n; ++i) y.samples[i] = x.samples[i] * ch.taps[0];
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            cpx acc(0.0, 0.0);
            const std::size_t t_max = std::min(ch.taps.size() - 1, i);
            for (std::size_t t = 0; t <= t_max; ++t) acc += ch.taps[t] * x.samples[i - t];
            y.samples[i] = acc;
        }
    }

    if (ch.cfo_hz != 0.0) shift_inplace(y.samples, ch.cfo_hz, y.sample_rate_hz, 0);

    Rng rng(ch.seed);
    if (ch.random_phase) {
        const cpx rot = std::polar(1.0, rng.uniform(0.0, 2.0 * M_PI));
        for (cpx& s : y.samples) s *= rot;
    }

    if (ch.snr_db < ChannelModel::kNoNoise && n > 0) {
        double p = 0.0;
        for (const cpx& s : y.samples) p += std::norm(s);
        p /= static_cast<double>(n);
        const double sigma = std::sqrt(p * std::pow(10.0, -ch.snr_db / 10.0));
        for (cpx& s : y.samples) s += sigma * rng.cnormal();
    }
    return y;
}

// ---------------------------------------------------------------------------
// Schedules
// ---------------------------------------------------------------------------

std::size_t TransmitterSchedule::segment_len() const {
    return static_cast<std::size_t>(std::llround(switch_time_s * sample_rate_hz));
}

void TransmitterSchedule::validate() const {
    if (entries.empty()) throw ParamError("schedule must have at least one entry");
    if (switch_time_s <= 0.0) throw ParamError("switch_time_s must be > 0");
    if (sample_rate_hz <= 0.0) throw ParamError("sample_rate_hz must be > 0");
    if (segment_len() == 0) throw ParamError("switch_time_s * sample_rate_hz rounds to zero");
    for (const auto& e : entries) {
        if (e.label < 0) throw ParamError("labels must be non-negative");
        std::visit([](const auto& c) { c.validate(); }, e.config);
    }
}

std::size_t segment_symbol_count(const PhyConfig& cfg, std::size_t seg_len) {
    if (const auto* sc = std::get_if<SingleCarrierConfig>(&cfg)) {
        const std::size_t sps = static_cast<std::size_t>(sc->samples_per_symbol);
        if (sc->pulse == PulseShape::Rectangular) return seg_len / sps;
        const std::size_t span_samples = static_cast<std::size_t>(kRrcSpanSymbols) * sps;
        return seg_len >= span_samples ? (seg_len - span_samples) / sps : 0;
    }
    const auto& of = std::get<OfdmConfig>(cfg);
    return seg_len / static_cast<std::size_t>(of.symbol_len());
}

std::size_t segment_payload_bits(const PhyConfig& cfg, std::size_t seg_len) {
    return segment_symbol_count(cfg, seg_len) * static_cast<std::size_t>(config_bits_per_symbol(cfg));
}

std::vector<std::uint8_t> segment_payload(const LabelTrack& track, std::size_t index,
                                          const PhyConfig& cfg, std::size_t seg_len) {
    Rng rng = Rng(track.payload_seed).fork(index);
    return rng.bits(segment_payload_bits(cfg, seg_len));
}

std::vector<cpx> render_segment(const PhyConfig& cfg, const std::vector<std::uint8_t>& bits,
                                std::size_t seg_len, double sample_rate_hz) {
    std::vector<cpx> seg(seg_len, cpx(0.0, 0.0));
    if (const auto* sc = std::get_if<SingleCarrierConfig>(&cfg)) {
        IQStream s = modulate_single_carrier(bits, *sc, sample_rate_hz);
        const std::size_t ncopy = std::min(seg_len, s.samples.size());
        std::copy(s.samples.begin(), s.samples.begin() + ncopy, seg.begin());
        return seg;
    }
    const auto& of = std::get<OfdmConfig>(cfg);
    const int bps = bits_per_symbol(of.bin_modulation);
    const std::size_t n_bins = of.occupied_bins.size();
    const std::size_t n_sym = bits.size() / (static_cast<std::size_t>(bps) * n_bins);
    SymbolGrid grid;
    grid.n_symbols = n_sym;
    grid.n_bins = n_bins;
    grid.data.reserve(n_sym * n_bins);
    std::size_t pos = 0;
    for (std::size_t s = 0; s < n_sym; ++s) {
        for (std::size_t b = 0; b < n_bins; ++b) {
            unsigned label = 0;
            for (int i = 0; i < bps; ++i) label = (label << 1) | (bits[pos++] & 1u);
            grid.data.push_back(map_symbol(of.bin_modulation, label));
        }
    }
    IQStream s = ofdm_modulate(grid, of, sample_rate_hz);
    const std::size_t ncopy = std::min(seg_len, s.samples.size());
    std::copy(s.samples.begin(), s.samples.begin() + ncopy, seg.begin());
    return seg;
}

std::pair<IQStream, LabelTrack> generate_schedule_stream(const TransmitterSchedule& sched,
                                                         std::uint64_t payload_seed) {
    sched.validate();
    const std::size_t seg_len = sched.segment_len();

    IQStream out;
    out.sample_rate_hz = sched.sample_rate_hz;
    out.samples.reserve(seg_len * sched.entries.size());
    LabelTrack track;
    track.payload_seed = payload_seed;

    for (std::size_t i = 0; i < sched.entries.size(); ++i) {
        const auto& entry = sched.entries[i];
        track.spans.push_back({out.samples.size(), entry.label});
        const auto bits = segment_payload(track, i, entry.config, seg_len);
        const auto seg = render_segment(entry.config, bits, seg_len, sched.sample_rate_hz);
        out.samples.insert(out.samples.end(), seg.begin(), seg.end());
    }
    return {std::move(out), std::move(track)};
}

}  // namespace polyrx
