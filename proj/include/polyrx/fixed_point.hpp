#pragma once

#include <cstdint>
#include <string>

namespace polyrx {

// 32-bit two's-complement fixed-point layout: `int_bits` integer bits
// (sign included) and 32 - int_bits fractional bits. The default Q(10,22)
// spans [-512, 512 - 2^-22] with resolution 2^-22.
struct FixedFormat {
    int total_bits = 32;
    int int_bits = 10;

    int frac_bits() const { return total_bits - int_bits; }
    double resolution() const { return 1.0 / static_cast<double>(1ll << frac_bits()); }
    double max_value() const;
    double min_value() const;
    std::string name() const;  // e.g. "fixed(32,10)"

    static FixedFormat q10_22() { return FixedFormat{}; }
    static FixedFormat parse(const std::string& name);  // inverse of name()

    bool operator==(const FixedFormat&) const = default;
};

// Round-to-nearest (ties away from zero) with saturation at the int32 rails.
std::int32_t fixed_from_real(double x, const FixedFormat& fmt);

double fixed_to_real(std::int32_t q, const FixedFormat& fmt);

// Rescale a widened multiply-accumulate result (2*frac_bits fractional bits)
// back to the storage format: round half away from zero, then saturate.
std::int32_t fixed_rescale(std::int64_t acc, const FixedFormat& fmt);

}  // namespace polyrx
