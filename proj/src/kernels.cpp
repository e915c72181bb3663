#include "polyrx/kernels.hpp"

#include <cstdlib>
#include <cstring>

#if defined(__ARM_NEON) || defined(__aarch64__)
#include <arm_neon.h>
#define POLYRX_NEON 1
#endif

namespace polyrx::kernels {

namespace detail {

float dot_f32_scalar(const float* a, const float* b, std::size_t n) {
    float acc = 0.0f;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy_f32_scalar(float alpha, const float* x, float* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

std::int64_t dot_q32_scalar(const std::int32_t* a, const std::int32_t* b, std::size_t n) {
    std::int64_t acc = 0;
    for (std::size_t i = 0; i < n; ++i)
        acc += static_cast<std::int64_t>(a[i]) * static_cast<std::int64_t>(b[i]);
    return acc;
}

void dot4_f32_scalar(const float* x, const float* const w[4], std::size_t n, float out[4]) {
    float s0 = 0, s1 = 0, s2 = 0, s3 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const float xi = x[i];
        s0 += xi * w[0][i];
        s1 += xi * w[1][i];
        s2 += xi * w[2][i];
        s3 += xi * w[3][i];
    }
    out[0] = s0;
    out[1] = s1;
    out[2] = s2;
    out[3] = s3;
}

void axpy4_f32_scalar(const float a[4], const float* x, float* const y[4], std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const float xi = x[i];
        y[0][i] += a[0] * xi;
        y[1][i] += a[1] * xi;
        y[2][i] += a[2] * xi;
        y[3][i] += a[3] * xi;
    }
}

void waxpy4_f32_scalar(const float a[4], const float* const w[4], float* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        y[i] += a[0] * w[0][i] + a[1] * w[1][i] + a[2] * w[2][i] + a[3] * w[3][i];
}

#if defined(POLYRX_NEON)

float dot_f32_neon(const float* a, const float* b, std::size_t n) {
    float32x4_t acc0 = vdupq_n_f32(0.0f);
    float32x4_t acc1 = vdupq_n_f32(0.0f);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = vmlaq_f32(acc0, vld1q_f32(a + i), vld1q_f32(b + i));
        acc1 = vmlaq_f32(acc1, vld1q_f32(a + i + 4), vld1q_f32(b + i + 4));
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = vmlaq_f32(acc0, vld1q_f32(a + i), vld1q_f32(b + i));
    }
    float32x4_t acc = vaddq_f32(acc0, acc1);
    float sum = vaddvq_f32(acc);
    for (; i < n; ++i) sum += a[i] * b[i];
    return sum;
}

void axpy_f32_neon(float alpha, const float* x, float* y, std::size_t n) {
    const float32x4_t va = vdupq_n_f32(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        vst1q_f32(y + i, vmlaq_f32(vld1q_f32(y + i), va, vld1q_f32(x + i)));
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

std::int64_t dot_q32_neon(const std::int32_t* a, const std::int32_t* b, std::size_t n) {
    int64x2_t acc = vdupq_n_s64(0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const int32x4_t va = vld1q_s32(a + i);
        const int32x4_t vb = vld1q_s32(b + i);
        acc = vaddq_s64(acc, vmull_s32(vget_low_s32(va), vget_low_s32(vb)));
        acc = vaddq_s64(acc, vmull_s32(vget_high_s32(va), vget_high_s32(vb)));
    }
    std::int64_t sum = vgetq_lane_s64(acc, 0) + vgetq_lane_s64(acc, 1);
    for (; i < n; ++i)
        sum += static_cast<std::int64_t>(a[i]) * static_cast<std::int64_t>(b[i]);
    return sum;
}

void dot4_f32_neon(const float* x, const float* const w[4], std::size_t n, float out[4]) {
    float32x4_t acc0 = vdupq_n_f32(0), acc1 = vdupq_n_f32(0);
    float32x4_t acc2 = vdupq_n_f32(0), acc3 = vdupq_n_f32(0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const float32x4_t xv = vld1q_f32(x + i);
        acc0 = vmlaq_f32(acc0, xv, vld1q_f32(w[0] + i));
        acc1 = vmlaq_f32(acc1, xv, vld1q_f32(w[1] + i));
        acc2 = vmlaq_f32(acc2, xv, vld1q_f32(w[2] + i));
        acc3 = vmlaq_f32(acc3, xv, vld1q_f32(w[3] + i));
    }
    out[0] = vaddvq_f32(acc0);
    out[1] = vaddvq_f32(acc1);
    out[2] = vaddvq_f32(acc2);
    out[3] = vaddvq_f32(acc3);
    for (; i < n; ++i) {
        const float xi = x[i];
        out[0] += xi * w[0][i];
        out[1] += xi * w[1][i];
        out[2] += xi * w[2][i];
        out[3] += xi * w[3][i];
    }
}

void axpy4_f32_neon(const float a[4], const float* x, float* const y[4], std::size_t n) {
    const float32x4_t a0 = vdupq_n_f32(a[0]), a1 = vdupq_n_f32(a[1]);
    const float32x4_t a2 = vdupq_n_f32(a[2]), a3 = vdupq_n_f32(a[3]);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const float32x4_t xv = vld1q_f32(x + i);
        vst1q_f32(y[0] + i, vmlaq_f32(vld1q_f32(y[0] + i), a0, xv));
        vst1q_f32(y[1] + i, vmlaq_f32(vld1q_f32(y[1] + i), a1, xv));
        vst1q_f32(y[2] + i, vmlaq_f32(vld1q_f32(y[2] + i), a2, xv));
        vst1q_f32(y[3] + i, vmlaq_f32(vld1q_f32(y[3] + i), a3, xv));
    }
    for (; i < n; ++i) {
        const float xi = x[i];
        y[0][i] += a[0] * xi;
        y[1][i] += a[1] * xi;
        y[2][i] += a[2] * xi;
        y[3][i] += a[3] * xi;
    }
}

void waxpy4_f32_neon(const float a[4], const float* const w[4], float* y, std::size_t n) {
    const float32x4_t a0 = vdupq_n_f32(a[0]), a1 = vdupq_n_f32(a[1]);
    const float32x4_t a2 = vdupq_n_f32(a[2]), a3 = vdupq_n_f32(a[3]);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        float32x4_t acc = vld1q_f32(y + i);
        acc = vmlaq_f32(acc, a0, vld1q_f32(w[0] + i));
        acc = vmlaq_f32(acc, a1, vld1q_f32(w[1] + i));
        acc = vmlaq_f32(acc, a2, vld1q_f32(w[2] + i));
        acc = vmlaq_f32(acc, a3, vld1q_f32(w[3] + i));
        vst1q_f32(y + i, acc);
    }
    for (; i < n; ++i)
        y[i] += a[0] * w[0][i] + a[1] * w[1][i] + a[2] * w[2][i] + a[3] * w[3][i];
}

#endif  // POLYRX_NEON

}  // namespace detail

namespace {

struct Dispatch {
    Backend backend;
    float (*dot_f32)(const float*, const float*, std::size_t);
    void (*axpy_f32)(float, const float*, float*, std::size_t);
    std::int64_t (*dot_q32)(const std::int32_t*, const std::int32_t*, std::size_t);
    void (*dot4_f32)(const float*, const float* const[4], std::size_t, float[4]);
    void (*axpy4_f32)(const float[4], const float*, float* const[4], std::size_t);
    void (*waxpy4_f32)(const float[4], const float* const[4], float*, std::size_t);
};

constexpr Dispatch kScalar{Backend::Scalar,          detail::dot_f32_scalar,
                           detail::axpy_f32_scalar,  detail::dot_q32_scalar,
                           detail::dot4_f32_scalar,  detail::axpy4_f32_scalar,
                           detail::waxpy4_f32_scalar};

#if defined(POLYRX_HAVE_AVX2)
constexpr Dispatch kAvx2{Backend::Avx2,            detail::dot_f32_avx2,
                         detail::axpy_f32_avx2,    detail::dot_q32_avx2,
                         detail::dot4_f32_avx2,    detail::axpy4_f32_avx2,
                         detail::waxpy4_f32_avx2};
#endif
#if defined(POLYRX_NEON)
constexpr Dispatch kNeon{Backend::Neon,            detail::dot_f32_neon,
                         detail::axpy_f32_neon,    detail::dot_q32_neon,
                         detail::dot4_f32_neon,    detail::axpy4_f32_neon,
                         detail::waxpy4_f32_neon};
#endif

bool backend_available(Backend b) {
    switch (b) {
        case Backend::Scalar:
            return true;
        case Backend::Avx2:
#if defined(POLYRX_HAVE_AVX2)
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
        case Backend::Neon:
#if defined(POLYRX_NEON)
            return true;
#else
            return false;
#endif
    }
    return false;
}

const Dispatch* table_for(Backend b) {
    switch (b) {
        case Backend::Scalar:
            return &kScalar;
#if defined(POLYRX_HAVE_AVX2)
        case Backend::Avx2:
            return &kAvx2;
#endif
#if defined(POLYRX_NEON)
        case Backend::Neon:
            return &kNeon;
#endif
        default:
            return &kScalar;
    }
}

Backend detect_backend() {
    if (const char* env = std::getenv("POLYRX_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return Backend::Scalar;
        if (std::strcmp(env, "avx2") == 0 && backend_available(Backend::Avx2)) return Backend::Avx2;
        if (std::strcmp(env, "neon") == 0 && backend_available(Backend::Neon)) return Backend::Neon;
        // unknown value or unavailable request: fall through to auto
    }
    if (backend_available(Backend::Avx2)) return Backend::Avx2;
    if (backend_available(Backend::Neon)) return Backend::Neon;
    return Backend::Scalar;
}

const Dispatch* g_dispatch = table_for(detect_backend());

}  // namespace

Backend active_backend() { return g_dispatch->backend; }

const char* backend_name(Backend b) {
    switch (b) {
        case Backend::Scalar:
            return "scalar";
        case Backend::Avx2:
            return "avx2";
        case Backend::Neon:
            return "neon";
    }
    return "?";
}

bool set_backend(Backend b) {
    if (!backend_available(b)) return false;
    g_dispatch = table_for(b);
    return true;
}

float dot_f32(const float* a, const float* b, std::size_t n) { return g_dispatch->dot_f32(a, b, n); }

void axpy_f32(float alpha, const float* x, float* y, std::size_t n) {
    g_dispatch->axpy_f32(alpha, x, y, n);
}

std::int64_t dot_q32(const std::int32_t* a, const std::int32_t* b, std::size_t n) {
    return g_dispatch->dot_q32(a, b, n);
}

void dot4_f32(const float* x, const float* const w[4], std::size_t n, float out[4]) {
    g_dispatch->dot4_f32(x, w, n, out);
}

void axpy4_f32(const float a[4], const float* x, float* const y[4], std::size_t n) {
    g_dispatch->axpy4_f32(a, x, y, n);
}

void waxpy4_f32(const float a[4], const float* const w[4], float* y, std::size_t n) {
    g_dispatch->waxpy4_f32(a, w, y, n);
}

}  // namespace polyrx::kernels
