#include "polyrx/fixed_point.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "polyrx/errors.hpp"

namespace polyrx {

double FixedFormat::max_value() const {
    return static_cast<double>(std::numeric_limits<std::int32_t>::max()) * resolution();
}

double FixedFormat::min_value() const {
    return static_cast<double>(std::numeric_limits<std::int32_t>::min()) * resolution();
}

std::string FixedFormat::name() const {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fixed(%d,%d)", total_bits, int_bits);
    return buf;
}

FixedFormat FixedFormat::parse(const std::string& name) {
    int total = 0, ints = 0;
    if (std::sscanf(name.c_str(), "fixed(%d,%d)", &total, &ints) != 2)
        throw ParamError("bad fixed-point format name: " + name);
    if (total != 32) throw ParamError("only 32-bit fixed-point is supported");
    if (ints < 1 || ints >= total) throw ParamError("bad integer-bit count in " + name);
    FixedFormat fmt;
    fmt.total_bits = total;
    fmt.int_bits = ints;
    return fmt;
}

std::int32_t fixed_from_real(double x, const FixedFormat& fmt) {
    if (!std::isfinite(x)) throw ParamError("cannot quantize a non-finite value");
    const double scaled = x * static_cast<double>(1ll << fmt.frac_bits());
    // llround rounds halves away from zero; clamp saturates out-of-range
    // values at the rails instead of wrapping.
    const double lo = static_cast<double>(std::numeric_limits<std::int32_t>::min());
    const double hi = static_cast<double>(std::numeric_limits<std::int32_t>::max());
    if (scaled >= hi) return std::numeric_limits<std::int32_t>::max();
    if (scaled <= lo) return std::numeric_limits<std::int32_t>::min();
    return static_cast<std::int32_t>(std::llround(scaled));
}

double fixed_to_real(std::int32_t q, const FixedFormat& fmt) {
    return static_cast<double>(q) * fmt.resolution();
}

std::int32_t fixed_rescale(std::int64_t acc, const FixedFormat& fmt) {
    const int shift = fmt.frac_bits();
    const std::int64_t half = 1ll << (shift - 1);
    std::int64_t r;
    if (acc >= 0) {
        r = (acc + half) >> shift;
    } else {
        r = -((-acc + half) >> shift);
    }
    if (r > std::numeric_limits<std::int32_t>::max()) return std::numeric_limits<std::int32_t>::max();
    if (r < std::numeric_limits<std::int32_t>::min()) return std::numeric_limits<std::int32_t>::min();
    return static_cast<std::int32_t>(r);
}

}  // namespace polyrx
