#include <doctest.h>

#include <cmath>

#include "polyrx/receiver.hpp"
#include "polyrx/rng.hpp"

using namespace polyrx;

namespace {

// Two-class single-carrier catalog that is cheap to synthesize: rectangular
// BPSK, one class shifted. One bit per sample at sps=1.
ClassCatalog cheap_catalog() {
    ClassCatalog cat;
    SingleCarrierConfig a;
    a.modulation = Modulation::BPSK;
    a.samples_per_symbol = 1;
    a.pulse = PulseShape::Rectangular;
    SingleCarrierConfig b = a;
    b.freq_shift_hz = 12500.0;  // S/8 at 100 kS/s
    cat.configs = {a, b};
    cat.names = {"bpsk", "bpsk_shift"};
    cat.validate();
    return cat;
}

std::pair<IQStream, LabelTrack> cheap_stream(const ClassCatalog& cat, int entries,
                                             std::size_t seg_len, std::uint64_t seed) {
    TransmitterSchedule sched;
    sched.sample_rate_hz = 1e5;
    sched.switch_time_s = static_cast<double>(seg_len) / sched.sample_rate_hz;
    for (int i = 0; i < entries; ++i) sched.entries.push_back({cat.configs[i % 2], i % 2});
    return generate_schedule_stream(sched, seed);
}

}  // namespace

TEST_CASE("catalog factories") {
    const auto sc = ClassCatalog::single_carrier_18(10);
    CHECK(sc.n_classes() == 18);
    CHECK(sc.names.front() == "BPSK_0Hz");
    CHECK(sc.names.back() == "QAM64_2000Hz");

    const auto of = ClassCatalog::ofdm_9(16);
    CHECK(of.n_classes() == 9);
    CHECK(of.names.front() == "OFDM64_BPSK");
    CHECK(of.names.back() == "OFDM256_8PSK");

    const auto full = ClassCatalog::ofdm_9(0);
    CHECK(std::get<OfdmConfig>(full.configs[0]).occupied_bins.size() == 63);
}

TEST_CASE("oracle recovers every payload bit on a noiseless stream") {
    const auto cat = cheap_catalog();
    const auto [stream, track] = cheap_stream(cat, 4, 5000, 31);
    const auto rep = oracle_receive(stream, track, cat);
    CHECK(rep.total.bits_demodulated == 4 * 5000u);
    CHECK(rep.total.bits_correct == rep.total.bits_demodulated);
    CHECK(rep.total.throughput_bps == doctest::Approx(1e5));
}

TEST_CASE("aligned perfect-classifier poly matches the oracle") {
    const auto cat = cheap_catalog();
    const auto [stream, track] = cheap_stream(cat, 4, 5000, 32);
    ReceiverRun run;
    run.buffer_samples = 1000;  // divides the 5000-sample switch period
    run.classifier = perfect_classifier(track);
    auto poly = poly_receive(stream, track, run, cat);
    const auto oracle = oracle_receive(stream, track, cat);
    attach_oracle(poly, oracle);
    CHECK(poly.total.bits_correct == oracle.total.bits_correct);
    CHECK(poly.total.ratio == doctest::Approx(1.0));
    CHECK(poly.classification_accuracy == 1.0);
    CHECK(poly.misassigned_samples == 0);
}

TEST_CASE("always-wrong classifier recovers nothing") {
    const auto cat = cheap_catalog();
    const auto [stream, track] = cheap_stream(cat, 3, 4000, 33);
    ReceiverRun run;
    run.buffer_samples = 1000;
    run.classifier = always_wrong_classifier(track, cat.n_classes());
    const auto rep = poly_receive(stream, track, run, cat);
    CHECK(rep.total.bits_correct == 0);
    CHECK(rep.classification_accuracy == 0.0);
    CHECK(rep.misassigned_samples == stream.size());
}

TEST_CASE("misaligned buffers lose about half a buffer per switch") {
    const auto cat = cheap_catalog();
    const std::size_t seg = 5000, B = 1000;
    Rng rng(34);
    double lost_sum = 0.0;
    const int trials = 40;
    for (int t = 0; t < trials; ++t) {
        const auto [stream, track] = cheap_stream(cat, 2, seg, 100 + t);
        const std::size_t offset = 1 + rng.uniform_int(B - 1);
        ReceiverRun run;
        run.buffer_samples = B;
        run.classifier = perfect_classifier(track);
        const auto rep = poly_receive(stream, track, run, cat, offset);
        lost_sum += static_cast<double>(rep.misassigned_samples);
    }
    // One boundary per trial; mean exposure should be near B/2.
    const double mean = lost_sum / trials;
    CHECK(mean > 0.3 * B);
    CHECK(mean < 0.7 * B);
}

TEST_CASE("oracle throughput scales with bits per symbol at a fixed FFT size") {
    double prev = 0.0;
    for (Modulation m : {Modulation::BPSK, Modulation::QPSK, Modulation::PSK8}) {
        ClassCatalog cat;
        cat.configs = {OfdmConfig::with_bins(64, m, 16)};
        cat.names = {to_string(m)};
        TransmitterSchedule sched;
        sched.sample_rate_hz = 1e6;
        sched.switch_time_s = 0.016;
        sched.entries.push_back({cat.configs[0], 0});
        const auto [stream, track] = generate_schedule_stream(sched, 9);
        const auto rep = oracle_receive(stream, track, cat);
        CHECK(rep.total.bits_correct == rep.total.bits_demodulated);
        if (prev > 0.0) {
            const double ratio = rep.total.throughput_bps / prev;
            CHECK(ratio == doctest::Approx(bits_per_symbol(m) /
                                           static_cast<double>(bits_per_symbol(m) - 1)));
        }
        prev = rep.total.throughput_bps;
    }
}

TEST_CASE("classification accuracy bookkeeping per class") {
    const auto cat = cheap_catalog();
    const auto [stream, track] = cheap_stream(cat, 4, 5000, 35);
    ReceiverRun run;
    run.buffer_samples = 2500;
    // Stub that is right on class 0 and wrong on class 1.
    run.classifier = [&track](const IQStream&, std::size_t start, std::size_t) {
        int label = 0;
        for (const auto& s : track.spans)
            if (s.start <= start) label = s.label;
        return label == 0 ? 0 : 0;  // always claims class 0
    };
    const auto rep = poly_receive(stream, track, run, cat);
    CHECK(rep.per_class[0].buffers == 4);
    CHECK(rep.per_class[0].buffers_correct == 4);
    CHECK(rep.per_class[1].buffers == 4);
    CHECK(rep.per_class[1].buffers_correct == 0);
    CHECK(rep.classification_accuracy == doctest::Approx(0.5));
    // Class 1 payload was all demodulated under the wrong chain.
    CHECK(rep.per_class[1].bits_correct == 0);
    CHECK(rep.per_class[0].bits_correct == rep.per_class[0].bits_demodulated);
}

TEST_CASE("confusion matrix for a rigged pixel-reading model") {
    // Dense-only model whose two logits read +x0 and -x0: positive first
    // sample means class 0.
    RfnetModel model;
    model.arch.m = 0;
    model.arch.k = 0;
    model.arch.input_w = 4;
    model.arch.input_h = 1;
    model.arch.n_classes = 2;
    model.arch.validate();
    FloatParams p = zero_params(model.arch);
    p.dense[0].weights[0] = 1.0f;                        // class 0 <- +x0
    p.dense[0].weights[model.arch.flat_size()] = -1.0f;  // class 1 <- -x0
    model.float_params = p;

    std::vector<RfTensor> xs;
    std::vector<int> ys;
    Rng rng(36);
    for (int i = 0; i < 40; ++i) {
        RfTensor t;
        t.w = 4;
        t.h = 1;
        t.data.assign(8, 0.0f);
        const int label = static_cast<int>(rng.uniform_int(2));
        t.data[0] = label == 0 ? 1.0f : -1.0f;
        xs.push_back(std::move(t));
        ys.push_back(label);
    }
    const auto cm = confusion_matrix(model, InferenceMode::Float, xs, ys);
    CHECK(cm[0][1] == 0);
    CHECK(cm[1][0] == 0);
    std::uint64_t row0 = cm[0][0] + cm[0][1];
    std::uint64_t count0 = 0;
    for (int y : ys)
        if (y == 0) ++count0;
    CHECK(row0 == count0);

    const auto csv = confusion_to_csv(cm, {"a", "b"});
    CHECK(csv.find("a,") != std::string::npos);
}

TEST_CASE("classify_buffer requires a full tensor window") {
    RfnetModel model;
    model.arch.m = 0;
    model.arch.input_w = 10;
    model.arch.input_h = 10;
    model.arch.n_classes = 2;
    model.float_params = zero_params(model.arch);
    IQStream s;
    s.samples.resize(50);
    CHECK_THROWS(classify_buffer(s, 0, 50, model, InferenceMode::Float));
}

TEST_CASE("simulation driver produces boundary-limited ratios with a perfect stub") {
    SimulationSpec spec;
    spec.catalog = cheap_catalog();
    spec.sample_rate_hz = 1e5;
    spec.switch_time_s = 0.05;  // 5000-sample segments
    spec.n_entries = 6;
    spec.buffer_samples = 1000;
    spec.seed = 77;

    // The driver wires its own classifier through run_simulation's argument;
    // a perfect stub isolates pure boundary exposure.
    LabelTrack track_capture;
    Classifier stub = [&track_capture](const IQStream&, std::size_t start, std::size_t) {
        int label = 0;
        for (const auto& s : track_capture.spans)
            if (s.start <= start) label = s.label;
        return label;
    };
    // Build the same schedule the driver will build to capture truth.
    // Easier: run once with oracle_only to get no poly, then run the reduced
    // check through poly directly.
    TransmitterSchedule sched;
    sched.sample_rate_hz = spec.sample_rate_hz;
    sched.switch_time_s = spec.switch_time_s;
    for (int i = 0; i < spec.n_entries; ++i)
        sched.entries.push_back({spec.catalog.configs[i % 2], i % 2});
    auto [stream, track] = generate_schedule_stream(sched, 123);
    track_capture = track;

    Rng rng(5);
    for (int t = 0; t < 5; ++t) {
        const std::size_t offset = rng.uniform_int(spec.buffer_samples);
        ReceiverRun run;
        run.buffer_samples = spec.buffer_samples;
        run.classifier = stub;
        auto poly = poly_receive(stream, track, run, spec.catalog, offset);
        const std::size_t n_buf = (stream.size() - offset) / spec.buffer_samples;
        const auto oracle =
            oracle_receive(stream, track, spec.catalog, offset, offset + n_buf * spec.buffer_samples);
        attach_oracle(poly, oracle);
        CHECK(poly.total.ratio >= 0.75);
        CHECK(poly.total.ratio <= 1.0 + 1e-12);
    }
}

TEST_CASE("run_simulation end to end with a model-free stub") {
    SimulationSpec spec;
    spec.catalog = cheap_catalog();
    spec.sample_rate_hz = 1e5;
    spec.switch_time_s = 0.04;
    spec.n_entries = 5;
    spec.buffer_samples = 800;
    spec.seed = 3;
    spec.oracle_only = true;
    const auto res = run_simulation(spec, Classifier{});
    CHECK(res.oracle.total.bits_correct > 0);
    CHECK(res.oracle.total.bits_correct == res.oracle.total.bits_demodulated);
}

TEST_CASE("report serialization carries the required columns") {
    const auto cat = cheap_catalog();
    const auto [stream, track] = cheap_stream(cat, 2, 4000, 37);
    ReceiverRun run;
    run.buffer_samples = 1000;
    run.classifier = perfect_classifier(track);
    auto poly = poly_receive(stream, track, run, cat);
    attach_oracle(poly, oracle_receive(stream, track, cat, 0, 8000));
    const auto csv = poly.to_csv();
    CHECK(csv.find("class,config,buffers,accuracy,bits_correct,throughput_bps,"
                   "oracle_throughput_bps,ratio") != std::string::npos);
    CHECK(csv.find("bpsk_shift") != std::string::npos);
    const auto j = poly.to_json();
    CHECK(j.find("\"ratio\"") != std::string::npos);
    CHECK(j.find("\"misassigned_samples\"") != std::string::npos);
}
