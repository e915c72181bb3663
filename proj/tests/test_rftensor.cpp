#include <doctest.h>

#include "polyrx/rftensor.hpp"
#include "polyrx/rng.hpp"

using namespace polyrx;

TEST_CASE("tensor index arithmetic on a ramp") {
    // s[k] = (k, -k): entry (r, c, d) must come from sample r*w + c.
    IQStream s;
    s.sample_rate_hz = 1.0;
    for (int k = 0; k < 40; ++k) s.samples.emplace_back(k, -k);
    const RfTensor t = build_tensor(s, 10, 4, 0);
    CHECK(t.at(1, 2, 0) == 12.0f);
    CHECK(t.at(1, 2, 1) == -12.0f);
    CHECK(t.at(0, 0, 0) == 0.0f);
    CHECK(t.at(3, 9, 0) == 39.0f);
}

TEST_CASE("1x1 tensor holds exactly the offset sample") {
    IQStream s;
    for (int k = 0; k < 5; ++k) s.samples.emplace_back(k + 0.5, k - 0.5);
    const RfTensor t = build_tensor(s, 1, 1, 3);
    CHECK(t.at(0, 0, 0) == 3.5f);
    CHECK(t.at(0, 0, 1) == 2.5f);
}

// Brute-force index-map oracle: flattening row-major and re-interleaving
// reproduces the float-valued window exactly, every sample used once.
TEST_CASE("tensor is a bijection of the sample window") {
    Rng rng(8);
    IQStream s;
    for (int k = 0; k < 200; ++k)
        s.samples.emplace_back(static_cast<float>(rng.uniform(-1, 1)),
                               static_cast<float>(rng.uniform(-1, 1)));
    const int w = 7, h = 9;
    const std::size_t offset = 13;
    const RfTensor t = build_tensor(s, w, h, offset);
    REQUIRE(t.data.size() == static_cast<std::size_t>(w) * h * 2);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const cpx& src = s.samples[offset + static_cast<std::size_t>(r) * w + c];
            CHECK(t.at(r, c, 0) == static_cast<float>(src.real()));
            CHECK(t.at(r, c, 1) == static_cast<float>(src.imag()));
        }
    }
}

TEST_CASE("adjacent rows are w samples apart; tiling offsets do not overlap") {
    IQStream s;
    for (int k = 0; k < 128; ++k) s.samples.emplace_back(k, 0);
    const RfTensor a = build_tensor(s, 8, 4, 0);
    const RfTensor b = build_tensor(s, 8, 4, 32);
    CHECK(a.at(1, 0, 0) - a.at(0, 0, 0) == 8.0f);
    CHECK(b.at(0, 0, 0) == 32.0f);  // tiles continue exactly where a ended
    CHECK(a.at(3, 7, 0) == 31.0f);
}

TEST_CASE("insufficient samples raise") {
    IQStream s;
    s.samples.resize(39);
    CHECK_THROWS(build_tensor(s, 10, 4, 0));
    CHECK_THROWS(build_tensor(s, 10, 3, 10));
    CHECK_NOTHROW(build_tensor(s, 10, 3, 9));
}
