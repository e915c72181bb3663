#include <doctest.h>

#include <cmath>
#include <vector>

#include "polyrx/kernels.hpp"
#include "polyrx/rng.hpp"

using namespace polyrx;
namespace kd = polyrx::kernels::detail;

namespace {

struct BackendGuard {
    kernels::Backend saved = kernels::active_backend();
    ~BackendGuard() { kernels::set_backend(saved); }
};

}  // namespace

TEST_CASE("scalar kernels compute the obvious sums") {
    const std::vector<float> a = {1, 2, 3, 4};
    const std::vector<float> b = {5, 6, 7, 8};
    CHECK(kd::dot_f32_scalar(a.data(), b.data(), 4) == doctest::Approx(70.0f));

    std::vector<float> y = {1, 1, 1, 1};
    kd::axpy_f32_scalar(2.0f, a.data(), y.data(), 4);
    CHECK(y[0] == 3.0f);
    CHECK(y[3] == 9.0f);

    const std::vector<std::int32_t> qa = {1000000, -2000000, 3};
    const std::vector<std::int32_t> qb = {4000000, 5000000, -6};
    CHECK(kd::dot_q32_scalar(qa.data(), qb.data(), 3) ==
          1000000ll * 4000000ll - 2000000ll * 5000000ll - 18ll);
}

// Every non-scalar backend available on this machine must agree with the
// scalar reference: exactly for the integer kernel, tightly for float.
TEST_CASE("simd variants agree with the scalar reference") {
    Rng rng(99);
    for (const std::size_t n : {1u, 7u, 8u, 15u, 16u, 33u, 257u}) {
        std::vector<float> a(n), b(n), y0(n), y1(n);
        std::vector<std::int32_t> qa(n), qb(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = static_cast<float>(rng.uniform(-2, 2));
            b[i] = static_cast<float>(rng.uniform(-2, 2));
            y0[i] = y1[i] = static_cast<float>(rng.uniform(-1, 1));
            qa[i] = static_cast<std::int32_t>(rng.uniform_int(1u << 30)) - (1 << 29);
            qb[i] = static_cast<std::int32_t>(rng.uniform_int(1u << 30)) - (1 << 29);
        }
        const float dot_ref = kd::dot_f32_scalar(a.data(), b.data(), n);
        const std::int64_t q_ref = kd::dot_q32_scalar(qa.data(), qb.data(), n);
        kd::axpy_f32_scalar(1.5f, a.data(), y0.data(), n);

#if defined(POLYRX_HAVE_AVX2)
        if (kernels::set_backend(kernels::Backend::Avx2)) {
            BackendGuard guard;
            CHECK(kernels::dot_q32(qa.data(), qb.data(), n) == q_ref);
            const float dot_avx = kernels::dot_f32(a.data(), b.data(), n);
            CHECK(std::abs(dot_avx - dot_ref) <=
                  1e-5f * std::max(1.0f, std::abs(dot_ref)) + 1e-5f);
            auto y = y1;
            kernels::axpy_f32(1.5f, a.data(), y.data(), n);
            for (std::size_t i = 0; i < n; ++i) CHECK(y[i] == doctest::Approx(y0[i]).epsilon(1e-5));
        }
#endif
    }
}

TEST_CASE("backend switching round-trips") {
    BackendGuard guard;
    CHECK(kernels::set_backend(kernels::Backend::Scalar));
    CHECK(kernels::active_backend() == kernels::Backend::Scalar);
    const float a[2] = {1.0f, 2.0f};
    const float b[2] = {3.0f, 4.0f};
    CHECK(kernels::dot_f32(a, b, 2) == doctest::Approx(11.0f));
}
