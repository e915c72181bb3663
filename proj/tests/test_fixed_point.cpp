#include <doctest.h>

#include <cmath>
#include <limits>

#include "polyrx/fixed_point.hpp"
#include "polyrx/rng.hpp"

using namespace polyrx;

TEST_CASE("q10.22 layout") {
    const FixedFormat fmt = FixedFormat::q10_22();
    CHECK(fmt.frac_bits() == 22);
    CHECK(fmt.resolution() == doctest::Approx(std::pow(2.0, -22)));
    CHECK(fmt.max_value() == doctest::Approx(512.0 - std::pow(2.0, -22)));
    CHECK(fmt.min_value() == doctest::Approx(-512.0));
    CHECK(fmt.name() == "fixed(32,10)");
    CHECK(FixedFormat::parse("fixed(32,10)") == fmt);
}

TEST_CASE("quantization of known values") {
    const FixedFormat fmt = FixedFormat::q10_22();
    CHECK(fixed_from_real(0.0, fmt) == 0);
    CHECK(fixed_from_real(1.5, fmt) == 6291456);  // 1.5 * 2^22
    CHECK(fixed_from_real(-1.0, fmt) == -(1 << 22));

    // Out of range saturates to the rails; 1000 dequantizes to ~512 - 2^-22.
    const std::int32_t sat = fixed_from_real(1000.0, fmt);
    CHECK(sat == std::numeric_limits<std::int32_t>::max());
    CHECK(fixed_to_real(sat, fmt) == doctest::Approx(512.0 - std::pow(2.0, -22)));
    CHECK(fixed_from_real(-1000.0, fmt) == std::numeric_limits<std::int32_t>::min());
}

TEST_CASE("round trip error is at most half a step") {
    const FixedFormat fmt = FixedFormat::q10_22();
    const double bound = std::pow(2.0, -23);
    Rng rng(5);
    for (int i = 0; i < 20000; ++i) {
        const double x = rng.uniform(-511.0, 511.0);
        const double back = fixed_to_real(fixed_from_real(x, fmt), fmt);
        CHECK(std::abs(back - x) <= bound);
    }
}

TEST_CASE("rescale rounds half away from zero and saturates") {
    const FixedFormat fmt = FixedFormat::q10_22();
    const std::int64_t one = 1ll << 22;
    CHECK(fixed_rescale(5 * one, fmt) == 5);
    // Exactly +/- half a step.
    CHECK(fixed_rescale((1ll << 21), fmt) == 1);
    CHECK(fixed_rescale(-(1ll << 21), fmt) == -1);
    CHECK(fixed_rescale((1ll << 21) - 1, fmt) == 0);
    CHECK(fixed_rescale(-(1ll << 21) + 1, fmt) == 0);
    // Saturation.
    CHECK(fixed_rescale(std::numeric_limits<std::int64_t>::max() / 2, fmt) ==
          std::numeric_limits<std::int32_t>::max());
    CHECK(fixed_rescale(std::numeric_limits<std::int64_t>::min() / 2, fmt) ==
          std::numeric_limits<std::int32_t>::min());
}
