#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "polyrx/dataset.hpp"
#include "polyrx/errors.hpp"
#include "polyrx/experiment.hpp"
#include "polyrx/rng.hpp"
#include "polyrx/train.hpp"
#include "polyrx/weights_io.hpp"

using namespace polyrx;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("polyrx_test_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string file_bytes(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

ClassCatalog tiny_catalog() {
    ClassCatalog cat;
    SingleCarrierConfig a;
    a.modulation = Modulation::QPSK;
    a.samples_per_symbol = 2;
    a.pulse = PulseShape::Rectangular;
    cat.configs.push_back(a);
    cat.names.push_back("qpsk");
    cat.configs.push_back(OfdmConfig::with_bins(16, Modulation::BPSK, 4));
    cat.names.push_back("ofdm16");
    cat.validate();
    return cat;
}

}  // namespace

TEST_CASE("dataset files have the documented size and balance") {
    TempDir tmp;
    const auto cat = tiny_catalog();
    DatasetGenConfig cfg;
    cfg.sample_rate_hz = 1e5;
    cfg.w = 8;
    cfg.h = 8;
    cfg.per_class = 10;
    cfg.seed = 1;
    const auto ds = generate_dataset(cat, cfg);
    CHECK(ds.size() == 20);

    const std::string path = (tmp.path / "d.iq").string();
    save_dataset(ds, cat, path);
    // 2 classes * 10 tensors * w*h samples * 8 bytes per sample.
    CHECK(fs::file_size(path) == 2u * 10u * 64u * 8u);

    const auto loaded = load_dataset(path);
    CHECK(loaded.size() == ds.size());
    CHECK(loaded.w == 8);
    CHECK(loaded.class_names == cat.names);
    int counts[2] = {0, 0};
    for (std::size_t i = 0; i < ds.size(); ++i) {
        CHECK(loaded.labels[i] == ds.labels[i]);
        CHECK(loaded.tensors[i].data == ds.tensors[i].data);
        counts[loaded.labels[i]]++;
    }
    CHECK(counts[0] == counts[1]);
}

TEST_CASE("dataset generation is byte-reproducible per seed") {
    TempDir tmp;
    const auto cat = tiny_catalog();
    DatasetGenConfig cfg;
    cfg.sample_rate_hz = 1e5;
    cfg.w = 6;
    cfg.h = 6;
    cfg.per_class = 5;
    cfg.seed = 42;

    const std::string p1 = (tmp.path / "a.iq").string();
    const std::string p2 = (tmp.path / "b.iq").string();
    save_dataset(generate_dataset(cat, cfg), cat, p1);
    save_dataset(generate_dataset(cat, cfg), cat, p2);
    CHECK(file_bytes(p1) == file_bytes(p2));
    CHECK(file_bytes(p1 + ".json") == file_bytes(p2 + ".json"));

    cfg.seed = 43;
    const std::string p3 = (tmp.path / "c.iq").string();
    save_dataset(generate_dataset(cat, cfg), cat, p3);
    CHECK(file_bytes(p1) != file_bytes(p3));
}

TEST_CASE("split keeps class balance") {
    const auto cat = tiny_catalog();
    DatasetGenConfig cfg;
    cfg.sample_rate_hz = 1e5;
    cfg.w = 6;
    cfg.h = 6;
    cfg.per_class = 10;
    cfg.seed = 2;
    const auto ds = generate_dataset(cat, cfg);
    const auto [train_ds, test_ds] = split_dataset(ds, 0.2, 7);
    CHECK(train_ds.size() == 16);
    CHECK(test_ds.size() == 4);
    int test_counts[2] = {0, 0};
    for (int y : test_ds.labels) test_counts[y]++;
    CHECK(test_counts[0] == 2);
    CHECK(test_counts[1] == 2);
}

TEST_CASE("weight files round trip in both formats") {
    TempDir tmp;
    RfnetArch arch;
    arch.m = 1;
    arch.conv_filters = {4};
    arch.f = 3;
    arch.k = 1;
    arch.dense_units = {6};
    arch.input_w = 8;
    arch.input_h = 8;
    arch.n_classes = 3;
    arch.validate();

    RfnetModel model;
    model.arch = arch;
    model.float_params = init_params(arch, 99);

    const std::string fpath = (tmp.path / "w.rfnet").string();
    save_model(model, fpath);
    const auto back = load_model(fpath);
    CHECK(back.arch == arch);
    REQUIRE(back.float_params.has_value());
    CHECK(back.float_params->conv[0].filters == model.float_params->conv[0].filters);
    CHECK(back.float_params->dense[1].weights == model.float_params->dense[1].weights);

    // Header names the format.
    std::ifstream f(fpath);
    std::string header;
    std::getline(f, header);
    CHECK(header.find("\"float32\"") != std::string::npos);

    RfnetModel fixed;
    fixed.arch = arch;
    fixed.format = FixedFormat::q10_22();
    fixed.quant_params = quantize(*model.float_params, fixed.format);
    const std::string qpath = (tmp.path / "q.rfnet").string();
    save_model(fixed, qpath);
    std::ifstream qf(qpath);
    std::getline(qf, header);
    CHECK(header.find("fixed(32,10)") != std::string::npos);

    const auto qback = load_model(qpath);
    REQUIRE(qback.quant_params.has_value());
    CHECK(qback.quant_params->conv[0].filters == fixed.quant_params->conv[0].filters);
    CHECK(qback.format == fixed.format);

    // Quantizing a quantized record changes nothing.
    const auto requant = quantize(dequantize(*qback.quant_params, qback.format), qback.format);
    CHECK(requant.conv[0].filters == qback.quant_params->conv[0].filters);
    CHECK(requant.dense[1].weights == qback.quant_params->dense[1].weights);
}

TEST_CASE("experiment spec round trips through JSON") {
    ExperimentSpec spec;
    spec.catalog.kind = "ofdm-9";
    spec.catalog.ofdm_occupied = 12;
    spec.arch.m = 2;
    spec.arch.c = {25, 25};
    spec.train.epochs = 7;
    spec.run.buffer_samples = 123456;
    spec.out_dir = "somewhere";

    const auto text = spec.to_json_string();
    const auto back = ExperimentSpec::from_json_string(text);
    CHECK(back.catalog.kind == "ofdm-9");
    CHECK(back.catalog.ofdm_occupied == 12);
    CHECK(back.arch.c == std::vector<int>{25, 25});
    CHECK(back.train.epochs == 7);
    CHECK(back.run.buffer_samples == 123456);
    CHECK(back.out_dir == "somewhere");
    CHECK_NOTHROW(back.validate());
}

TEST_CASE("spec validation rejects bad combinations before work starts") {
    ExperimentSpec spec;
    spec.run.buffer_samples = 10;  // smaller than the model input
    CHECK_THROWS(spec.validate());

    ExperimentSpec bad_catalog;
    bad_catalog.catalog.kind = "nope";
    CHECK_THROWS(bad_catalog.validate());

    ExperimentSpec bad_arch;
    bad_arch.arch.m = 5;
    bad_arch.arch.c = {4, 4, 4, 4, 4};
    bad_arch.arch.w = 8;
    bad_arch.arch.h = 8;  // shrinks below 1x1
    CHECK_THROWS(bad_arch.validate());
}

TEST_CASE("missing files surface the path in the error") {
    try {
        load_model("/nonexistent/weights.rfnet");
        FAIL("expected an exception");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("/nonexistent/weights.rfnet") != std::string::npos);
    }
}
