#include <doctest.h>

#include <cstring>

#include "polyrx/fixed_point.hpp"
#include "polyrx/rfnet.hpp"
#include "polyrx/rng.hpp"

using namespace polyrx;

namespace {

ConvLayer<float> random_conv(int f, int din, int c, Rng& rng) {
    ConvLayer<float> l;
    l.filters.resize(static_cast<std::size_t>(c) * f * f * din);
    l.biases.resize(static_cast<std::size_t>(c));
    for (auto& v : l.filters) v = static_cast<float>(rng.uniform(-1, 1));
    for (auto& v : l.biases) v = static_cast<float>(rng.uniform(-1, 1));
    return l;
}

ConvLayer<std::int32_t> quantize_conv(const ConvLayer<float>& l, const FixedFormat& fmt) {
    ConvLayer<std::int32_t> q;
    for (float v : l.filters) q.filters.push_back(fixed_from_real(v, fmt));
    for (float v : l.biases) q.biases.push_back(fixed_from_real(v, fmt));
    return q;
}

}  // namespace

TEST_CASE("streaming cycle accounting matches the 4x4/F=3 walk-through") {
    Rng rng(41);
    const int w = 4, h = 4, din = 2, f = 3, c = 1;
    std::vector<float> input(static_cast<std::size_t>(w) * h * din);
    for (auto& v : input) v = static_cast<float>(rng.uniform(-1, 1));
    const auto layer = random_conv(f, din, c, rng);
    const auto res = streaming_conv(input.data(), w, h, din, layer, f, c);

    CHECK(res.cycles.line_fill == 12);  // full after 12 sample insertions
    CHECK(res.cycles.window_prime == 3);
    CHECK(res.cycles.outputs == 4);  // one per window position post-fill
    CHECK(res.cycles.total() == 19);
}

TEST_CASE("streaming equals direct convolution bit for bit") {
    Rng rng(42);
    const FixedFormat fmt = FixedFormat::q10_22();
    int cases = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const int f = 2 + static_cast<int>(rng.uniform_int(2));  // 2 or 3
        const int w = f + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(9 - f)));
        const int h = f + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(9 - f)));
        const int din = 1 + static_cast<int>(rng.uniform_int(3));
        const int c = 1 + static_cast<int>(rng.uniform_int(4));

        std::vector<float> input(static_cast<std::size_t>(w) * h * din);
        for (auto& v : input) v = static_cast<float>(rng.uniform(-2, 2));
        const auto layer = random_conv(f, din, c, rng);

        // Float path: zero-ulp agreement, same accumulation order.
        const auto direct = conv2d_valid(input.data(), w, h, din, layer, f, c);
        const auto streamed = streaming_conv(input.data(), w, h, din, layer, f, c);
        REQUIRE(direct.size() == streamed.output.size());
        CHECK(std::memcmp(direct.data(), streamed.output.data(),
                          direct.size() * sizeof(float)) == 0);

        // Fixed path: bit-identical int32 outputs.
        std::vector<std::int32_t> qinput(input.size());
        for (std::size_t i = 0; i < input.size(); ++i) qinput[i] = fixed_from_real(input[i], fmt);
        const auto qlayer = quantize_conv(layer, fmt);
        const auto qdirect = conv2d_valid_fixed(qinput.data(), w, h, din, qlayer, f, c, fmt);
        const auto qstream = streaming_conv_fixed(qinput.data(), w, h, din, qlayer, f, c, fmt);
        CHECK(qdirect == qstream.output);

        CHECK(streamed.cycles.line_fill == static_cast<std::uint64_t>(f) * w);
        CHECK(streamed.cycles.outputs ==
              static_cast<std::uint64_t>(w - f + 1) * static_cast<std::uint64_t>(h - f + 1));
        ++cases;
    }
    CHECK(cases == 300);
}

TEST_CASE("streaming preconditions") {
    Rng rng(43);
    const auto layer = random_conv(1, 1, 1, rng);
    std::vector<float> input(16, 0.0f);
    CHECK_THROWS(streaming_conv(input.data(), 4, 4, 1, layer, 1, 1));  // f >= 2
    const auto layer3 = random_conv(3, 1, 1, rng);
    CHECK_THROWS(streaming_conv(input.data(), 2, 8, 1, layer3, 3, 1));  // w >= f
}
