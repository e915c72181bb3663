#pragma once

#include <string>

#include "polyrx/rfnet.hpp"

namespace polyrx {

// Weight file layout: a single-line JSON header
//   {"format": "float32" | "fixed(32,10)", "arch": {...}}
// terminated by '\n', followed by flat little-endian arrays per layer in
// declaration order: each conv layer's filters then biases, each dense
// layer's weights (row-major) then biases. float32 payload for "float32",
// int32 for fixed formats.
void save_model(const RfnetModel& model, const std::string& path);

RfnetModel load_model(const std::string& path);

}  // namespace polyrx
