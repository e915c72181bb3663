#include "polyrx/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "polyrx/config_json.hpp"
#include "polyrx/errors.hpp"

namespace polyrx {

using nlohmann::json;

RfTensor synthesize_example(const ClassCatalog& catalog, int label, std::size_t example_index,
                            const DatasetGenConfig& cfg) {
    if (label < 0 || label >= catalog.n_classes()) throw ParamError("label out of catalog range");
    Rng rng = Rng(cfg.seed).fork(static_cast<std::uint64_t>(label)).fork(example_index);
    const PhyConfig& phy = catalog.configs[static_cast<std::size_t>(label)];
    const std::size_t window = static_cast<std::size_t>(cfg.w) * cfg.h;

    IQStream stream;
    std::size_t pos = 0;
    if (const auto* sc = std::get_if<SingleCarrierConfig>(&phy)) {
        const std::size_t sps = static_cast<std::size_t>(sc->samples_per_symbol);
        const std::size_t warmup =
            sc->pulse == PulseShape::Rectangular ? 0 : static_cast<std::size_t>(kRrcSpanSymbols) * sps;
        const std::size_t jitter = cfg.random_symbol_offset ? rng.uniform_int(sps) : 0;
        pos = warmup + jitter;
        const std::size_t n_sym = (pos + window) / sps + 2;
        const auto bits = rng.bits(n_sym * static_cast<std::size_t>(bits_per_symbol(sc->modulation)));
        stream = modulate_single_carrier(bits, *sc, cfg.sample_rate_hz);
    } else {
        const auto& of = std::get<OfdmConfig>(phy);
        const std::size_t L = static_cast<std::size_t>(of.symbol_len());
        const std::size_t jitter = cfg.random_symbol_offset ? rng.uniform_int(L) : 0;
        pos = jitter;
        const std::size_t n_sym = (pos + window) / L + 2;
        const auto bits = rng.bits(n_sym * static_cast<std::size_t>(config_bits_per_symbol(phy)));
        stream.samples = render_segment(phy, bits, n_sym * L, cfg.sample_rate_hz);
        stream.sample_rate_hz = cfg.sample_rate_hz;
    }

    ChannelModel ch = cfg.channel;
    ch.seed = rng.next_u64();
    ch.random_phase = cfg.random_phase;
    stream = apply_channel(stream, ch);
    return build_tensor(stream, cfg.w, cfg.h, pos);
}

TensorDataset generate_dataset(const ClassCatalog& catalog, const DatasetGenConfig& cfg) {
    catalog.validate();
    if (cfg.per_class < 1) throw ParamError("per_class must be >= 1");
    if (cfg.w < 1 || cfg.h < 1) throw ParamError("tensor size must be >= 1");

    TensorDataset ds;
    ds.w = cfg.w;
    ds.h = cfg.h;
    ds.sample_rate_hz = cfg.sample_rate_hz;
    ds.class_names = catalog.names;
    ds.tensors.reserve(static_cast<std::size_t>(catalog.n_classes()) * cfg.per_class);
    for (int label = 0; label < catalog.n_classes(); ++label) {
        for (int i = 0; i < cfg.per_class; ++i) {
            ds.tensors.push_back(synthesize_example(catalog, label, static_cast<std::size_t>(i), cfg));
            ds.labels.push_back(label);
        }
    }
    return ds;
}

void save_dataset(const TensorDataset& ds, const ClassCatalog& catalog, const std::string& iq_path) {
    std::ofstream f(iq_path, std::ios::binary);
    if (!f) throw IoError("cannot open " + iq_path + " for writing");

    json sidecar;
    sidecar["sample_rate_hz"] = ds.sample_rate_hz;
    sidecar["w"] = ds.w;
    sidecar["h"] = ds.h;
    sidecar["class_names"] = ds.class_names;
    json labels = json::array();

    std::size_t start = 0;
    for (std::size_t i = 0; i < ds.tensors.size(); ++i) {
        const RfTensor& t = ds.tensors[i];
        f.write(reinterpret_cast<const char*>(t.data.data()),
                static_cast<std::streamsize>(t.data.size() * sizeof(float)));
        labels.push_back(json{{"start", start},
                              {"label", ds.labels[i]},
                              {"config", phy_config_to_json(
                                   catalog.configs[static_cast<std::size_t>(ds.labels[i])])}});
        start += t.sample_count();
    }
    sidecar["labels"] = std::move(labels);
    if (!f) throw IoError("write failed for " + iq_path);
    f.close();

    std::ofstream sf(iq_path + ".json");
    if (!sf) throw IoError("cannot open " + iq_path + ".json for writing");
    sf << sidecar.dump(2) << '\n';
    if (!sf) throw IoError("write failed for " + iq_path + ".json");
}

TensorDataset load_dataset(const std::string& iq_path) {
    std::ifstream sf(iq_path + ".json");
    if (!sf) throw IoError("cannot open sidecar " + iq_path + ".json");
    json sidecar;
    sf >> sidecar;

    TensorDataset ds;
    ds.sample_rate_hz = sidecar.at("sample_rate_hz").get<double>();
    ds.w = sidecar.at("w").get<int>();
    ds.h = sidecar.at("h").get<int>();
    ds.class_names = sidecar.at("class_names").get<std::vector<std::string>>();

    std::ifstream f(iq_path, std::ios::binary);
    if (!f) throw IoError("cannot open " + iq_path);
    const std::size_t window = static_cast<std::size_t>(ds.w) * ds.h;
    for (const auto& entry : sidecar.at("labels")) {
        const std::size_t start = entry.at("start").get<std::size_t>();
        RfTensor t;
        t.w = ds.w;
        t.h = ds.h;
        t.data.resize(window * 2);
        f.seekg(static_cast<std::streamoff>(start * 2 * sizeof(float)));
        f.read(reinterpret_cast<char*>(t.data.data()),
               static_cast<std::streamsize>(t.data.size() * sizeof(float)));
        if (!f) throw IoError("truncated dataset file " + iq_path);
        ds.tensors.push_back(std::move(t));
        ds.labels.push_back(entry.at("label").get<int>());
    }
    return ds;
}

std::pair<TensorDataset, TensorDataset> split_dataset(const TensorDataset& ds,
                                                      double test_fraction, std::uint64_t seed) {
    if (test_fraction < 0.0 || test_fraction > 1.0) throw ParamError("test_fraction out of range");
    const int n_classes = static_cast<int>(ds.class_names.size());
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(n_classes));
    for (std::size_t i = 0; i < ds.labels.size(); ++i)
        by_class[static_cast<std::size_t>(ds.labels[i])].push_back(i);

    Rng rng(seed);
    TensorDataset train = ds, test = ds;
    train.tensors.clear();
    train.labels.clear();
    test.tensors.clear();
    test.labels.clear();
    for (auto& idx : by_class) {
        for (std::size_t i = idx.size(); i > 1; --i)
            std::swap(idx[i - 1], idx[rng.uniform_int(i)]);
        const std::size_t n_test = static_cast<std::size_t>(
            std::llround(test_fraction * static_cast<double>(idx.size())));
        for (std::size_t i = 0; i < idx.size(); ++i) {
            auto& dst = i < n_test ? test : train;
            dst.tensors.push_back(ds.tensors[idx[i]]);
            dst.labels.push_back(ds.labels[idx[i]]);
        }
    }
    return {std::move(train), std::move(test)};
}

}  // namespace polyrx
