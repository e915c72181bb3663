#include "polyrx/rftensor.hpp"

#include "polyrx/errors.hpp"

namespace polyrx {

RfTensor build_tensor(const IQStream& s, int w, int h, std::size_t offset) {
    if (w < 1 || h < 1) throw ParamError("tensor dimensions must be >= 1");
    const std::size_t need = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    if (s.samples.size() < offset + need)
        throw InsufficientDataError("need " + std::to_string(offset + need) + " samples, have " +
                                    std::to_string(s.samples.size()));
    RfTensor t;
    t.w = w;
    t.h = h;
    t.data.resize(need * 2);
    const cpx* src = s.samples.data() + offset;
    for (std::size_t i = 0; i < need; ++i) {
        t.data[2 * i] = static_cast<float>(src[i].real());
        t.data[2 * i + 1] = static_cast<float>(src[i].imag());
    }
    return t;
}

}  // namespace polyrx
