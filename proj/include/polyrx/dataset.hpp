#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "polyrx/receiver.hpp"
#include "polyrx/rftensor.hpp"
#include "polyrx/waveform.hpp"

namespace polyrx {

// Labeled tensor windows, balanced across classes.
struct TensorDataset {
    int w = 0;
    int h = 0;
    double sample_rate_hz = 1.0;
    std::vector<RfTensor> tensors;
    std::vector<int> labels;
    std::vector<std::string> class_names;

    std::size_t size() const { return tensors.size(); }
};

struct DatasetGenConfig {
    double sample_rate_hz = 1e6;
    int w = 20;
    int h = 20;
    int per_class = 100;
    ChannelModel channel = ChannelModel::identity();  // per-example seed is derived
    bool random_phase = true;          // fresh carrier phase per example
    bool random_symbol_offset = true;  // window cut at a random symbol phase
    std::uint64_t seed = 0;
};

// One synthetic example of class `label`: fresh payload, channel draw and
// window alignment, all derived from cfg.seed, class and example index.
RfTensor synthesize_example(const ClassCatalog& catalog, int label, std::size_t example_index,
                            const DatasetGenConfig& cfg);

// per_class examples for every catalog class, grouped by class in label
// order. Deterministic in cfg.seed.
TensorDataset generate_dataset(const ClassCatalog& catalog, const DatasetGenConfig& cfg);

// On-disk layout: `iq_path` holds the raw windows back to back as
// little-endian float32 interleaved I/Q pairs (8 bytes per sample);
// `iq_path`.json is the sidecar {sample_rate_hz, w, h, class_names,
// labels:[{start, label, config}]}, start in samples.
void save_dataset(const TensorDataset& ds, const ClassCatalog& catalog, const std::string& iq_path);

TensorDataset load_dataset(const std::string& iq_path);

// Split helper: keeps per-class balance; `test_fraction` of each class goes
// to the second dataset. Order within splits is deterministic in seed.
std::pair<TensorDataset, TensorDataset> split_dataset(const TensorDataset& ds,
                                                      double test_fraction, std::uint64_t seed);

}  // namespace polyrx
