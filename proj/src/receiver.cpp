#include "polyrx/receiver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "polyrx/errors.hpp"
#include "polyrx/rftensor.hpp"

namespace polyrx {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Catalogs
// ---------------------------------------------------------------------------

void ClassCatalog::validate() const {
    if (configs.empty()) throw ParamError("catalog has no classes");
    if (names.size() != configs.size()) throw ParamError("catalog names/configs size mismatch");
    for (std::size_t i = 0; i < configs.size(); ++i)
        for (std::size_t j = i + 1; j < configs.size(); ++j)
            if (configs[i] == configs[j]) throw ParamError("catalog configs must be pairwise distinct");
}

ClassCatalog ClassCatalog::single_carrier_18(int samples_per_symbol, PulseShape pulse,
                                             double shift_step_hz) {
    ClassCatalog cat;
    for (Modulation m : {Modulation::BPSK, Modulation::QPSK, Modulation::PSK8, Modulation::QAM16,
                         Modulation::QAM32, Modulation::QAM64}) {
        for (int s = 0; s < 3; ++s) {
            SingleCarrierConfig cfg;
            cfg.modulation = m;
            cfg.samples_per_symbol = samples_per_symbol;
            cfg.freq_shift_hz = shift_step_hz * s;
            cfg.pulse = pulse;
            cat.configs.emplace_back(cfg);
            cat.names.push_back(to_string(m) + "_" + std::to_string(static_cast<int>(cfg.freq_shift_hz)) +
                                "Hz");
        }
    }
    cat.validate();
    return cat;
}

ClassCatalog ClassCatalog::ofdm_9(int n_occupied) {
    ClassCatalog cat;
    for (int fft : {64, 128, 256}) {
        for (Modulation m : {Modulation::BPSK, Modulation::QPSK, Modulation::PSK8}) {
            OfdmConfig cfg = (n_occupied > 0) ? OfdmConfig::with_bins(fft, m, n_occupied)
                                              : OfdmConfig::standard(fft, m);
            cat.configs.emplace_back(cfg);
            cat.names.push_back("OFDM" + std::to_string(fft) + "_" + to_string(m));
        }
    }
    cat.validate();
    return cat;
}

// ---------------------------------------------------------------------------
// Classifiers
// ---------------------------------------------------------------------------

ClassPrediction classify_buffer(const IQStream& stream, std::size_t buf_start,
                                std::size_t buf_len, const RfnetModel& model, InferenceMode mode) {
    const std::size_t need = static_cast<std::size_t>(model.arch.input_w) * model.arch.input_h;
    if (buf_len < need)
        throw InsufficientDataError("buffer of " + std::to_string(buf_len) +
                                    " samples is shorter than the model input " +
                                    std::to_string(need));
    const RfTensor t = build_tensor(stream, model.arch.input_w, model.arch.input_h, buf_start);
    return predict(model, t, mode);
}

Classifier model_classifier(const RfnetModel& model, InferenceMode mode) {
    return [&model, mode](const IQStream& stream, std::size_t buf_start, std::size_t buf_len) {
        return classify_buffer(stream, buf_start, buf_len, model, mode).argmax;
    };
}

namespace {

int truth_label_at(const LabelTrack& truth, std::size_t pos) {
    int label = truth.spans.empty() ? 0 : truth.spans.front().label;
    for (const auto& span : truth.spans) {
        if (span.start > pos) break;
        label = span.label;
    }
    return label;
}

}  // namespace

Classifier perfect_classifier(const LabelTrack& truth) {
    return [&truth](const IQStream&, std::size_t buf_start, std::size_t) {
        return truth_label_at(truth, buf_start);
    };
}

Classifier always_wrong_classifier(const LabelTrack& truth, int n_classes) {
    return [&truth, n_classes](const IQStream&, std::size_t buf_start, std::size_t) {
        return (truth_label_at(truth, buf_start) + 1) % n_classes;
    };
}

// ---------------------------------------------------------------------------
// Scoring
// ---------------------------------------------------------------------------

namespace {

struct SegmentView {
    std::size_t origin = 0;   // stream index of the segment start
    std::size_t seg_len = 0;  // full segment length
    std::size_t begin = 0;    // visible part, clipped to the scoring window
    std::size_t end = 0;
    std::size_t index = 0;    // schedule entry index (payload regeneration)
    int label = 0;
};

std::vector<SegmentView> make_views(const LabelTrack& truth, std::size_t stream_len,
                                    std::size_t window_start, std::size_t window_end) {
    std::vector<SegmentView> views;
    for (std::size_t i = 0; i < truth.spans.size(); ++i) {
        const std::size_t seg_begin = truth.spans[i].start;
        const std::size_t seg_end =
            (i + 1 < truth.spans.size()) ? truth.spans[i + 1].start : stream_len;
        SegmentView v;
        v.origin = seg_begin;
        v.seg_len = seg_end - seg_begin;
        v.begin = std::max(seg_begin, window_start);
        v.end = std::min(seg_end, window_end);
        v.index = i;
        v.label = truth.spans[i].label;
        if (v.begin < v.end) views.push_back(v);
    }
    return views;
}

struct RegionScore {
    std::uint64_t attempted = 0;
    std::uint64_t correct = 0;
};

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

// Demodulates the payload symbols of the segment whose full sample support
// lies inside [a, b) and compares them with the known payload. The symbol
// clock and shift phase are referenced to the segment origin: timing is
// granted once the configuration is known (synchronization loops are out of
// scope, so a correct inference implies a locked chain).
RegionScore score_matched(const IQStream& stream, const SegmentView& view, const PhyConfig& cfg,
                          const std::vector<std::uint8_t>& payload, std::size_t a, std::size_t b) {
    RegionScore score;
    const std::size_t n_payload_sym = segment_symbol_count(cfg, view.seg_len);
    if (n_payload_sym == 0 || b <= a) return score;

    std::size_t k_first = 0, k_end = 0;  // [k_first, k_end)
    std::size_t slice_begin = 0, slice_len = 0;
    int bps = 0;

    if (const auto* sc = std::get_if<SingleCarrierConfig>(&cfg)) {
        const std::size_t sps = static_cast<std::size_t>(sc->samples_per_symbol);
        bps = bits_per_symbol(sc->modulation);
        const std::size_t support =
            (sc->pulse == PulseShape::Rectangular)
                ? sps
                : static_cast<std::size_t>(kRrcSpanSymbols) * sps + 1;
        k_first = (a > view.origin) ? ceil_div(a - view.origin, sps) : 0;
        if (b < view.origin + support) return score;
        k_end = std::min<std::size_t>((b - view.origin - support) / sps + 1, n_payload_sym);
        if (k_end <= k_first) return score;
        slice_begin = view.origin + k_first * sps;
        slice_len = (k_end - k_first - 1) * sps + support;
    } else {
        const auto& of = std::get<OfdmConfig>(cfg);
        const std::size_t L = static_cast<std::size_t>(of.symbol_len());
        bps = config_bits_per_symbol(cfg);
        k_first = (a > view.origin) ? ceil_div(a - view.origin, L) : 0;
        if (b < view.origin + L) return score;
        k_end = std::min<std::size_t>((b - view.origin) / L, n_payload_sym);
        if (k_end <= k_first) return score;
        slice_begin = view.origin + k_first * L;
        slice_len = (k_end - k_first) * L;
    }

    IQStream slice;
    slice.sample_rate_hz = stream.sample_rate_hz;
    slice.samples.assign(stream.samples.begin() + static_cast<std::ptrdiff_t>(slice_begin),
                         stream.samples.begin() + static_cast<std::ptrdiff_t>(slice_begin + slice_len));

    std::vector<std::uint8_t> bits;
    if (const auto* sc = std::get_if<SingleCarrierConfig>(&cfg)) {
        bits = demodulate_single_carrier(slice, *sc, slice_begin - view.origin);
    } else {
        const auto& of = std::get<OfdmConfig>(cfg);
        const SymbolGrid grid = ofdm_demodulate(slice, of, 0);
        const int bin_bps = bits_per_symbol(of.bin_modulation);
        bits.reserve(grid.data.size() * static_cast<std::size_t>(bin_bps));
        for (const cpx& y : grid.data) {
            const unsigned label = demap_symbol(of.bin_modulation, y);
            for (int i = 0; i < bin_bps; ++i)
                bits.push_back(static_cast<std::uint8_t>((label >> (bin_bps - 1 - i)) & 1u));
        }
    }

    const std::size_t bit_first = k_first * static_cast<std::size_t>(bps);
    const std::size_t n_bits = (k_end - k_first) * static_cast<std::size_t>(bps);
    score.attempted = n_bits;
    for (std::size_t i = 0; i < n_bits && i < bits.size(); ++i)
        if (bits[i] == payload[bit_first + i]) ++score.correct;
    return score;
}

// Bits a receiver would emit demodulating `n_samples` under `cfg`; used to
// account demodulated-but-worthless output of a mismatched chain.
std::uint64_t demodulated_bits_estimate(const PhyConfig& cfg, std::size_t n_samples) {
    if (const auto* sc = std::get_if<SingleCarrierConfig>(&cfg))
        return sc_symbol_capacity(n_samples, *sc) *
               static_cast<std::uint64_t>(bits_per_symbol(sc->modulation));
    const auto& of = std::get<OfdmConfig>(cfg);
    return (n_samples / static_cast<std::size_t>(of.symbol_len())) *
           static_cast<std::uint64_t>(config_bits_per_symbol(cfg));
}

ThroughputReport finalize_report(std::vector<ClassReportRow> rows, double duration_s,
                                 std::uint64_t misassigned) {
    ThroughputReport rep;
    rep.per_class = std::move(rows);
    rep.duration_s = duration_s;
    rep.misassigned_samples = misassigned;
    rep.total.label = -1;
    rep.total.config_name = "total";
    for (auto& row : rep.per_class) {
        row.throughput_bps = duration_s > 0.0 ? static_cast<double>(row.bits_correct) / duration_s : 0.0;
        rep.total.buffers += row.buffers;
        rep.total.buffers_correct += row.buffers_correct;
        rep.total.bits_demodulated += row.bits_demodulated;
        rep.total.bits_correct += row.bits_correct;
    }
    rep.total.throughput_bps =
        duration_s > 0.0 ? static_cast<double>(rep.total.bits_correct) / duration_s : 0.0;
    rep.classification_accuracy =
        rep.total.buffers > 0
            ? static_cast<double>(rep.total.buffers_correct) / static_cast<double>(rep.total.buffers)
            : 0.0;
    return rep;
}

}  // namespace

// ---------------------------------------------------------------------------
// Receivers
// ---------------------------------------------------------------------------

ThroughputReport poly_receive(const IQStream& stream, const LabelTrack& truth,
                              const ReceiverRun& run, const ClassCatalog& catalog,
                              std::size_t window_start) {
    catalog.validate();
    if (!run.classifier) throw ParamError("receiver run has no classifier");
    if (run.buffer_samples < 1) throw ParamError("buffer_samples must be >= 1");
    if (truth.spans.empty()) throw ParamError("label track is empty");
    const std::size_t B = run.buffer_samples;
    if (stream.samples.size() < window_start + B)
        throw InsufficientDataError("stream shorter than one buffer");

    const std::size_t n_buf = (stream.samples.size() - window_start) / B;
    const std::size_t window_end = window_start + n_buf * B;
    const auto views = make_views(truth, stream.samples.size(), window_start, window_end);

    std::vector<ClassReportRow> rows(catalog.configs.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i].label = static_cast<int>(i);
        rows[i].config_name = catalog.names[i];
    }

    // Classify every buffer; count per-class hits against the head-sample truth.
    std::vector<int> decided(n_buf);
    for (std::size_t i = 0; i < n_buf; ++i) {
        const std::size_t start = window_start + i * B;
        const int got = run.classifier(stream, start, B);
        if (got < 0 || got >= catalog.n_classes())
            throw ParamError("classifier returned label out of catalog range");
        decided[i] = got;
        const int want = truth_label_at(truth, start);
        rows[static_cast<std::size_t>(want)].buffers++;
        if (got == want) rows[static_cast<std::size_t>(want)].buffers_correct++;
    }

    // Adjacent buffers classified alike feed one continuous chain, so score
    // per (run x visible segment) region.
    std::uint64_t misassigned = 0;
    std::size_t i = 0;
    while (i < n_buf) {
        std::size_t j = i + 1;
        while (j < n_buf && decided[j] == decided[i]) ++j;
        const int label_hat = decided[i];
        const std::size_t run_begin = window_start + i * B;
        const std::size_t run_end = window_start + j * B;
        for (const auto& view : views) {
            const std::size_t a = std::max(view.begin, run_begin);
            const std::size_t b = std::min(view.end, run_end);
            if (a >= b) continue;
            auto& row = rows[static_cast<std::size_t>(view.label)];
            if (label_hat == view.label) {
                const auto payload =
                    segment_payload(truth, view.index, catalog.configs[view.label], view.seg_len);
                const RegionScore s =
                    score_matched(stream, view, catalog.configs[view.label], payload, a, b);
                row.bits_demodulated += s.attempted;
                row.bits_correct += s.correct;
            } else {
                row.bits_demodulated +=
                    demodulated_bits_estimate(catalog.configs[static_cast<std::size_t>(label_hat)],
                                              b - a);
                misassigned += b - a;
            }
        }
        i = j;
    }

    const double duration_s = static_cast<double>(window_end - window_start) / stream.sample_rate_hz;
    return finalize_report(std::move(rows), duration_s, misassigned);
}

ThroughputReport oracle_receive(const IQStream& stream, const LabelTrack& truth,
                                const ClassCatalog& catalog, std::size_t window_start,
                                std::size_t window_end) {
    catalog.validate();
    if (truth.spans.empty()) throw ParamError("label track is empty");
    if (window_end == 0 || window_end > stream.samples.size()) window_end = stream.samples.size();
    if (window_start >= window_end) throw ParamError("empty oracle window");

    const auto views = make_views(truth, stream.samples.size(), window_start, window_end);
    std::vector<ClassReportRow> rows(catalog.configs.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i].label = static_cast<int>(i);
        rows[i].config_name = catalog.names[i];
    }

    for (const auto& view : views) {
        const auto payload =
            segment_payload(truth, view.index, catalog.configs[view.label], view.seg_len);
        const RegionScore s = score_matched(stream, view, catalog.configs[view.label], payload,
                                            view.begin, view.end);
        auto& row = rows[static_cast<std::size_t>(view.label)];
        row.bits_demodulated += s.attempted;
        row.bits_correct += s.correct;
    }

    const double duration_s = static_cast<double>(window_end - window_start) / stream.sample_rate_hz;
    return finalize_report(std::move(rows), duration_s, 0);
}

void attach_oracle(ThroughputReport& poly, const ThroughputReport& oracle) {
    for (auto& row : poly.per_class) {
        for (const auto& orow : oracle.per_class) {
            if (orow.label == row.label) {
                row.oracle_throughput_bps = orow.throughput_bps;
                row.ratio = orow.throughput_bps > 0.0 ? row.throughput_bps / orow.throughput_bps : 0.0;
                break;
            }
        }
    }
    poly.total.oracle_throughput_bps = oracle.total.throughput_bps;
    poly.total.ratio = oracle.total.throughput_bps > 0.0
                           ? poly.total.throughput_bps / oracle.total.throughput_bps
                           : 0.0;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

namespace {

void row_csv(std::ostream& os, const ClassReportRow& r) {
    const double acc = r.buffers > 0 ? static_cast<double>(r.buffers_correct) / r.buffers : 0.0;
    os << r.label << ',' << r.config_name << ',' << r.buffers << ',' << acc << ','
       << r.bits_correct << ',' << r.throughput_bps << ',' << r.oracle_throughput_bps << ','
       << r.ratio << '\n';
}

json row_json(const ClassReportRow& r) {
    const double acc = r.buffers > 0 ? static_cast<double>(r.buffers_correct) / r.buffers : 0.0;
    return json{{"class", r.label},
                {"config", r.config_name},
                {"buffers", r.buffers},
                {"accuracy", acc},
                {"bits_demodulated", r.bits_demodulated},
                {"bits_correct", r.bits_correct},
                {"throughput_bps", r.throughput_bps},
                {"oracle_throughput_bps", r.oracle_throughput_bps},
                {"ratio", r.ratio}};
}

}  // namespace

std::string ThroughputReport::to_csv() const {
    std::ostringstream os;
    os << "class,config,buffers,accuracy,bits_correct,throughput_bps,oracle_throughput_bps,ratio\n";
    for (const auto& r : per_class) row_csv(os, r);
    row_csv(os, total);
    return os.str();
}

std::string ThroughputReport::to_json() const {
    json j;
    j["duration_s"] = duration_s;
    j["classification_accuracy"] = classification_accuracy;
    j["misassigned_samples"] = misassigned_samples;
    j["per_class"] = json::array();
    for (const auto& r : per_class) j["per_class"].push_back(row_json(r));
    j["total"] = row_json(total);
    return j.dump(2);
}

std::vector<std::vector<std::uint64_t>> confusion_matrix(const RfnetModel& model,
                                                         InferenceMode mode,
                                                         const std::vector<RfTensor>& inputs,
                                                         const std::vector<int>& labels) {
    if (inputs.empty()) throw ParamError("confusion matrix needs a non-empty dataset");
    if (inputs.size() != labels.size()) throw ShapeError("inputs/labels size mismatch");
    const std::size_t n = static_cast<std::size_t>(model.arch.n_classes);
    std::vector<std::vector<std::uint64_t>> cm(n, std::vector<std::uint64_t>(n, 0));
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const int got = predict(model, inputs[i], mode).argmax;
        cm[static_cast<std::size_t>(labels[i])][static_cast<std::size_t>(got)]++;
    }
    return cm;
}

std::string confusion_to_csv(const std::vector<std::vector<std::uint64_t>>& cm,
                             const std::vector<std::string>& names) {
    std::ostringstream os;
    os << "truth\\pred";
    for (const auto& n : names) os << ',' << n;
    os << '\n';
    for (std::size_t r = 0; r < cm.size(); ++r) {
        os << names[r];
        for (std::size_t c = 0; c < cm[r].size(); ++c) os << ',' << cm[r][c];
        os << '\n';
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Simulation driver
// ---------------------------------------------------------------------------

SimulationOutcome run_simulation(const SimulationSpec& spec, const Classifier& classifier) {
    spec.catalog.validate();
    if (spec.n_entries < 1) throw ParamError("simulation needs at least one schedule entry");

    Rng rng(spec.seed);
    TransmitterSchedule sched;
    sched.switch_time_s = spec.switch_time_s;
    sched.sample_rate_hz = spec.sample_rate_hz;
    const int n = spec.catalog.n_classes();
    int prev = -1;
    for (int i = 0; i < spec.n_entries; ++i) {
        int label;
        if (n == 1) {
            label = 0;
        } else {
            // Pseudo-random switching; adjacent entries always differ.
            label = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n - (prev >= 0 ? 1 : 0))));
            if (prev >= 0 && label >= prev) ++label;
        }
        sched.entries.push_back({spec.catalog.configs[static_cast<std::size_t>(label)], label});
        prev = label;
    }

    const std::uint64_t payload_seed = rng.next_u64();
    auto [stream, track] = generate_schedule_stream(sched, payload_seed);

    ChannelModel ch = spec.channel;
    ch.seed = rng.next_u64();
    if (ch.snr_db < ChannelModel::kNoNoise || ch.cfo_hz != 0.0 || ch.taps.size() > 1 ||
        ch.random_phase || ch.taps[0] != cpx(1.0, 0.0)) {
        stream = apply_channel(stream, ch);
    }

    // The receiver wakes up at an arbitrary point of the schedule: start the
    // buffer clock at a uniformly random phase.
    const std::size_t offset = static_cast<std::size_t>(rng.uniform_int(spec.buffer_samples));
    const std::size_t n_buf = (stream.samples.size() - offset) / spec.buffer_samples;
    const std::size_t window_end = offset + n_buf * spec.buffer_samples;

    SimulationOutcome out;
    out.oracle = oracle_receive(stream, track, spec.catalog, offset, window_end);
    if (!spec.oracle_only) {
        ReceiverRun run;
        run.buffer_samples = spec.buffer_samples;
        run.classifier = classifier;
        out.poly = poly_receive(stream, track, run, spec.catalog, offset);
        attach_oracle(out.poly, out.oracle);
        out.ratio = out.poly.total.ratio;
    }
    return out;
}

}  // namespace polyrx
