#pragma once

#include <json.hpp>

#include "polyrx/waveform.hpp"

namespace polyrx {

nlohmann::json phy_config_to_json(const PhyConfig& cfg);
PhyConfig phy_config_from_json(const nlohmann::json& j);

}  // namespace polyrx
