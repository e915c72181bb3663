#pragma once

#include <cstdint>
#include <string>

#include "polyrx/dataset.hpp"
#include "polyrx/receiver.hpp"
#include "polyrx/train.hpp"

namespace polyrx {

// One experiment = one config file (plus flag overrides). Every CLI
// subcommand reads the parts it needs, so a single spec can drive
// gen-dataset -> train -> quantize -> eval -> simulate end to end.
struct ExperimentSpec {
    struct Catalog {
        std::string kind = "single-carrier-18";  // or "ofdm-9"
        int sps = 10;
        std::string pulse = "rrc";  // or "rect"
        double shift_step_hz = 1000.0;
        int ofdm_occupied = 16;  // 0 = all non-DC bins
    } catalog;

    double sample_rate_hz = 1e6;

    struct Channel {
        std::string preset = "awgn";  // "identity" | "awgn" | "nlos"
        double snr_db = 20.0;
        double cfo_hz = 0.0;
        bool random_phase = true;
    } channel;

    struct Arch {
        int m = 1;
        std::vector<int> c = {25};
        int f = 3;
        int k = 0;
        std::vector<int> d = {};
        int w = 20;
        int h = 20;
    } arch;

    TrainConfig train;

    struct Dataset {
        int per_class = 400;
        int test_per_class = 100;
        bool random_symbol_offset = true;
        std::uint64_t seed = 7;
    } dataset;

    struct Run {
        std::size_t buffer_samples = 250000;
        double switch_time_s = 0.25;
        double sample_rate_hz = 5e6;  // simulation S (paper timing by default)
        int entries = 12;
        int seeds = 20;
        std::string inference = "float";  // or "fixed"
    } run;

    std::uint64_t seed = 1;
    std::string out_dir = "out";

    void validate() const;
    ClassCatalog build_catalog() const;
    RfnetArch build_arch(int n_classes) const;
    ChannelModel build_channel(std::uint64_t seed_override) const;
    DatasetGenConfig build_dataset_config(bool test_split) const;
    InferenceMode inference_mode() const;

    std::string to_json_string() const;
    static ExperimentSpec from_json_string(const std::string& text);
    static ExperimentSpec load(const std::string& path);
};

}  // namespace polyrx
