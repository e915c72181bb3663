#pragma once

#include <cstddef>
#include <vector>

#include "polyrx/iq.hpp"

namespace polyrx {

// Classifier input: w x h x 2 real tensor. Entry (r, c, 0) holds the real
// part and (r, c, 1) the imaginary part of the same complex sample, with
// sample index r * w + c into the source window, so adjacent columns are one
// sample apart in time and adjacent rows are w samples apart. Storage is
// row-major with depth innermost: data[(r * w + c) * 2 + d].
struct RfTensor {
    int w = 0;
    int h = 0;
    std::vector<float> data;

    float at(int r, int c, int d) const { return data[(static_cast<std::size_t>(r) * w + c) * 2 + d]; }
    float& at(int r, int c, int d) { return data[(static_cast<std::size_t>(r) * w + c) * 2 + d]; }
    std::size_t sample_count() const { return static_cast<std::size_t>(w) * h; }
};

// Packs samples s[offset .. offset + w*h) into a tensor. Throws
// InsufficientDataError when the stream is too short.
RfTensor build_tensor(const IQStream& s, int w, int h, std::size_t offset = 0);

}  // namespace polyrx
