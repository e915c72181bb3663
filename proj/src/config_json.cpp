#include "polyrx/config_json.hpp"

#include "polyrx/errors.hpp"

namespace polyrx {

using nlohmann::json;

json phy_config_to_json(const PhyConfig& cfg) {
    if (const auto* sc = std::get_if<SingleCarrierConfig>(&cfg)) {
        return json{{"type", "single_carrier"},
                    {"modulation", to_string(sc->modulation)},
                    {"samples_per_symbol", sc->samples_per_symbol},
                    {"freq_shift_hz", sc->freq_shift_hz},
                    {"pulse", sc->pulse == PulseShape::Rectangular ? "rect" : "rrc"}};
    }
    const auto& of = std::get<OfdmConfig>(cfg);
    return json{{"type", "ofdm"},
                {"fft_size", of.fft_size},
                {"bin_modulation", to_string(of.bin_modulation)},
                {"cp_len", of.cp_len},
                {"occupied_bins", of.occupied_bins}};
}

PhyConfig phy_config_from_json(const json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "single_carrier") {
        SingleCarrierConfig sc;
        sc.modulation = modulation_from_string(j.at("modulation").get<std::string>());
        sc.samples_per_symbol = j.at("samples_per_symbol").get<int>();
        sc.freq_shift_hz = j.at("freq_shift_hz").get<double>();
        const std::string pulse = j.value("pulse", "rrc");
        sc.pulse = pulse == "rect" ? PulseShape::Rectangular : PulseShape::RootRaisedCosine;
        sc.validate();
        return sc;
    }
    if (type == "ofdm") {
        OfdmConfig of;
        of.fft_size = j.at("fft_size").get<int>();
        of.bin_modulation = modulation_from_string(j.at("bin_modulation").get<std::string>());
        of.cp_len = j.at("cp_len").get<int>();
        of.occupied_bins = j.at("occupied_bins").get<std::vector<int>>();
        of.validate();
        return of;
    }
    throw ParamError("unknown config type: " + type);
}

}  // namespace polyrx
