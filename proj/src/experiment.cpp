#include "polyrx/experiment.hpp"

#include <fstream>

#include <json.hpp>

#include "polyrx/errors.hpp"

namespace polyrx {

using nlohmann::json;

void ExperimentSpec::validate() const {
    build_catalog();  // throws on bad catalog parameters
    if (sample_rate_hz <= 0.0) throw ParamError("sample_rate_hz must be > 0");
    if (channel.preset != "identity" && channel.preset != "awgn" && channel.preset != "nlos")
        throw ParamError("unknown channel preset: " + channel.preset);
    if (dataset.per_class < 1 || dataset.test_per_class < 0)
        throw ParamError("dataset sizes must be positive");
    if (run.buffer_samples < static_cast<std::size_t>(arch.w) * arch.h)
        throw ParamError("buffer must be at least the model input size");
    if (run.switch_time_s <= 0.0 || run.sample_rate_hz <= 0.0)
        throw ParamError("run timing must be positive");
    if (run.entries < 1 || run.seeds < 1) throw ParamError("run counts must be >= 1");
    if (run.inference != "float" && run.inference != "fixed")
        throw ParamError("inference must be float or fixed");
    if (train.epochs < 1) throw ParamError("epochs must be >= 1");
    ClassCatalog cat = build_catalog();
    build_arch(cat.n_classes()).validate();
}

ClassCatalog ExperimentSpec::build_catalog() const {
    if (catalog.kind == "single-carrier-18") {
        const PulseShape pulse =
            catalog.pulse == "rect" ? PulseShape::Rectangular : PulseShape::RootRaisedCosine;
        return ClassCatalog::single_carrier_18(catalog.sps, pulse, catalog.shift_step_hz);
    }
    if (catalog.kind == "ofdm-9") return ClassCatalog::ofdm_9(catalog.ofdm_occupied);
    throw ParamError("unknown catalog kind: " + catalog.kind);
}

RfnetArch ExperimentSpec::build_arch(int n_classes) const {
    RfnetArch a;
    a.m = arch.m;
    a.conv_filters = arch.c;
    a.f = arch.f;
    a.k = arch.k;
    a.dense_units = arch.d;
    a.input_w = arch.w;
    a.input_h = arch.h;
    a.n_classes = n_classes;
    return a;
}

ChannelModel ExperimentSpec::build_channel(std::uint64_t seed_override) const {
    ChannelModel ch;
    if (channel.preset == "identity") {
        ch = ChannelModel::identity();
    } else if (channel.preset == "awgn") {
        ch = ChannelModel::awgn(channel.snr_db, seed_override);
    } else {
        ch = ChannelModel::nlos(channel.snr_db, seed_override);
    }
    ch.cfo_hz = channel.cfo_hz;
    ch.seed = seed_override;
    ch.random_phase = channel.random_phase;
    return ch;
}

DatasetGenConfig ExperimentSpec::build_dataset_config(bool test_split) const {
    DatasetGenConfig cfg;
    cfg.sample_rate_hz = sample_rate_hz;
    cfg.w = arch.w;
    cfg.h = arch.h;
    cfg.per_class = test_split ? dataset.test_per_class : dataset.per_class;
    cfg.channel = build_channel(0);  // per-example seeds are derived inside
    cfg.random_phase = channel.random_phase;
    cfg.random_symbol_offset = dataset.random_symbol_offset;
    // Disjoint example streams for the train and held-out splits.
    cfg.seed = test_split ? dataset.seed ^ 0x7e57da7aull : dataset.seed;
    return cfg;
}

InferenceMode ExperimentSpec::inference_mode() const {
    return run.inference == "fixed" ? InferenceMode::Fixed : InferenceMode::Float;
}

std::string ExperimentSpec::to_json_string() const {
    json j;
    j["catalog"] = {{"kind", catalog.kind},
                    {"sps", catalog.sps},
                    {"pulse", catalog.pulse},
                    {"shift_step_hz", catalog.shift_step_hz},
                    {"ofdm_occupied", catalog.ofdm_occupied}};
    j["sample_rate_hz"] = sample_rate_hz;
    j["channel"] = {{"preset", channel.preset},
                    {"snr_db", channel.snr_db},
                    {"cfo_hz", channel.cfo_hz},
                    {"random_phase", channel.random_phase}};
    j["arch"] = {{"m", arch.m}, {"c", arch.c}, {"f", arch.f},     {"k", arch.k},
                 {"d", arch.d}, {"w", arch.w}, {"h", arch.h}};
    j["train"] = {{"learning_rate", train.learning_rate},
                  {"l2_lambda", train.l2_lambda},
                  {"batch_size", train.batch_size},
                  {"epochs", train.epochs},
                  {"seed", train.seed}};
    j["dataset"] = {{"per_class", dataset.per_class},
                    {"test_per_class", dataset.test_per_class},
                    {"random_symbol_offset", dataset.random_symbol_offset},
                    {"seed", dataset.seed}};
    j["run"] = {{"buffer_samples", run.buffer_samples},
                {"switch_time_s", run.switch_time_s},
                {"sample_rate_hz", run.sample_rate_hz},
                {"entries", run.entries},
                {"seeds", run.seeds},
                {"inference", run.inference}};
    j["seed"] = seed;
    j["out"] = out_dir;
    return j.dump(2);
}

ExperimentSpec ExperimentSpec::from_json_string(const std::string& text) {
    const json j = json::parse(text);
    ExperimentSpec s;
    if (j.contains("catalog")) {
        const auto& c = j["catalog"];
        s.catalog.kind = c.value("kind", s.catalog.kind);
        s.catalog.sps = c.value("sps", s.catalog.sps);
        s.catalog.pulse = c.value("pulse", s.catalog.pulse);
        s.catalog.shift_step_hz = c.value("shift_step_hz", s.catalog.shift_step_hz);
        s.catalog.ofdm_occupied = c.value("ofdm_occupied", s.catalog.ofdm_occupied);
    }
    s.sample_rate_hz = j.value("sample_rate_hz", s.sample_rate_hz);
    if (j.contains("channel")) {
        const auto& c = j["channel"];
        s.channel.preset = c.value("preset", s.channel.preset);
        s.channel.snr_db = c.value("snr_db", s.channel.snr_db);
        s.channel.cfo_hz = c.value("cfo_hz", s.channel.cfo_hz);
        s.channel.random_phase = c.value("random_phase", s.channel.random_phase);
    }
    if (j.contains("arch")) {
        const auto& a = j["arch"];
        s.arch.m = a.value("m", s.arch.m);
        s.arch.c = a.value("c", s.arch.c);
        s.arch.f = a.value("f", s.arch.f);
        s.arch.k = a.value("k", s.arch.k);
        s.arch.d = a.value("d", s.arch.d);
        s.arch.w = a.value("w", s.arch.w);
        s.arch.h = a.value("h", s.arch.h);
    }
    if (j.contains("train")) {
        const auto& t = j["train"];
        s.train.learning_rate = t.value("learning_rate", s.train.learning_rate);
        s.train.l2_lambda = t.value("l2_lambda", s.train.l2_lambda);
        s.train.batch_size = t.value("batch_size", s.train.batch_size);
        s.train.epochs = t.value("epochs", s.train.epochs);
        s.train.seed = t.value("seed", s.train.seed);
    }
    if (j.contains("dataset")) {
        const auto& d = j["dataset"];
        s.dataset.per_class = d.value("per_class", s.dataset.per_class);
        s.dataset.test_per_class = d.value("test_per_class", s.dataset.test_per_class);
        s.dataset.random_symbol_offset =
            d.value("random_symbol_offset", s.dataset.random_symbol_offset);
        s.dataset.seed = d.value("seed", s.dataset.seed);
    }
    if (j.contains("run")) {
        const auto& r = j["run"];
        s.run.buffer_samples = r.value("buffer_samples", s.run.buffer_samples);
        s.run.switch_time_s = r.value("switch_time_s", s.run.switch_time_s);
        s.run.sample_rate_hz = r.value("sample_rate_hz", s.run.sample_rate_hz);
        s.run.entries = r.value("entries", s.run.entries);
        s.run.seeds = r.value("seeds", s.run.seeds);
        s.run.inference = r.value("inference", s.run.inference);
    }
    s.seed = j.value("seed", s.seed);
    s.out_dir = j.value("out", s.out_dir);
    return s;
}

ExperimentSpec ExperimentSpec::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open spec file " + path);
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return from_json_string(text);
}

}  // namespace polyrx
