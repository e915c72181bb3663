// AVX2 + FMA kernel variants. This translation unit is the only one built
// with -mavx2 -mfma; callers reach it through the runtime dispatch table in
// kernels.cpp, which checks cpuid first.

#include "polyrx/kernels.hpp"

#if defined(POLYRX_HAVE_AVX2)

#include <immintrin.h>

namespace polyrx::kernels::detail {

float dot_f32_avx2(const float* a, const float* b, std::size_t n) {
    __m256 acc0 = _mm256_setzero_ps();
    __m256 acc1 = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
        acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 8), _mm256_loadu_ps(b + i + 8), acc1);
    }
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
    }
    __m256 acc = _mm256_add_ps(acc0, acc1);
    __m128 lo = _mm256_castps256_ps128(acc);
    __m128 hi = _mm256_extractf128_ps(acc, 1);
    __m128 sum4 = _mm_add_ps(lo, hi);
    __m128 sum2 = _mm_add_ps(sum4, _mm_movehl_ps(sum4, sum4));
    __m128 sum1 = _mm_add_ss(sum2, _mm_shuffle_ps(sum2, sum2, 0x55));
    float sum = _mm_cvtss_f32(sum1);
    for (; i < n; ++i) sum += a[i] * b[i];
    return sum;
}

void axpy_f32_avx2(float alpha, const float* x, float* y, std::size_t n) {
    const __m256 va = _mm256_set1_ps(alpha);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        _mm256_storeu_ps(y + i, _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void dot4_f32_avx2(const float* x, const float* const w[4], std::size_t n, float out[4]) {
    __m256 acc0 = _mm256_setzero_ps(), acc1 = _mm256_setzero_ps();
    __m256 acc2 = _mm256_setzero_ps(), acc3 = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 xv = _mm256_loadu_ps(x + i);
        acc0 = _mm256_fmadd_ps(xv, _mm256_loadu_ps(w[0] + i), acc0);
        acc1 = _mm256_fmadd_ps(xv, _mm256_loadu_ps(w[1] + i), acc1);
        acc2 = _mm256_fmadd_ps(xv, _mm256_loadu_ps(w[2] + i), acc2);
        acc3 = _mm256_fmadd_ps(xv, _mm256_loadu_ps(w[3] + i), acc3);
    }
    auto hsum = [](__m256 v) {
        __m128 s = _mm_add_ps(_mm256_castps256_ps128(v), _mm256_extractf128_ps(v, 1));
        s = _mm_add_ps(s, _mm_movehl_ps(s, s));
        s = _mm_add_ss(s, _mm_shuffle_ps(s, s, 0x55));
        return _mm_cvtss_f32(s);
    };
    out[0] = hsum(acc0);
    out[1] = hsum(acc1);
    out[2] = hsum(acc2);
    out[3] = hsum(acc3);
    for (; i < n; ++i) {
        const float xi = x[i];
        out[0] += xi * w[0][i];
        out[1] += xi * w[1][i];
        out[2] += xi * w[2][i];
        out[3] += xi * w[3][i];
    }
}

void axpy4_f32_avx2(const float a[4], const float* x, float* const y[4], std::size_t n) {
    const __m256 a0 = _mm256_set1_ps(a[0]), a1 = _mm256_set1_ps(a[1]);
    const __m256 a2 = _mm256_set1_ps(a[2]), a3 = _mm256_set1_ps(a[3]);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 xv = _mm256_loadu_ps(x + i);
        _mm256_storeu_ps(y[0] + i, _mm256_fmadd_ps(a0, xv, _mm256_loadu_ps(y[0] + i)));
        _mm256_storeu_ps(y[1] + i, _mm256_fmadd_ps(a1, xv, _mm256_loadu_ps(y[1] + i)));
        _mm256_storeu_ps(y[2] + i, _mm256_fmadd_ps(a2, xv, _mm256_loadu_ps(y[2] + i)));
        _mm256_storeu_ps(y[3] + i, _mm256_fmadd_ps(a3, xv, _mm256_loadu_ps(y[3] + i)));
    }
    for (; i < n; ++i) {
        const float xi = x[i];
        y[0][i] += a[0] * xi;
        y[1][i] += a[1] * xi;
        y[2][i] += a[2] * xi;
        y[3][i] += a[3] * xi;
    }
}

void waxpy4_f32_avx2(const float a[4], const float* const w[4], float* y, std::size_t n) {
    const __m256 a0 = _mm256_set1_ps(a[0]), a1 = _mm256_set1_ps(a[1]);
    const __m256 a2 = _mm256_set1_ps(a[2]), a3 = _mm256_set1_ps(a[3]);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 acc = _mm256_loadu_ps(y + i);
        acc = _mm256_fmadd_ps(a0, _mm256_loadu_ps(w[0] + i), acc);
        acc = _mm256_fmadd_ps(a1, _mm256_loadu_ps(w[1] + i), acc);
        acc = _mm256_fmadd_ps(a2, _mm256_loadu_ps(w[2] + i), acc);
        acc = _mm256_fmadd_ps(a3, _mm256_loadu_ps(w[3] + i), acc);
        _mm256_storeu_ps(y + i, acc);
    }
    for (; i < n; ++i)
        y[i] += a[0] * w[0][i] + a[1] * w[1][i] + a[2] * w[2][i] + a[3] * w[3][i];
}

std::int64_t dot_q32_avx2(const std::int32_t* a, const std::int32_t* b, std::size_t n) {
    // 32x32->64 products: _mm256_mul_epi32 multiplies the even lanes, a
    // 32-bit shift exposes the odd lanes. Wrapping int64 adds keep the sum
    // order-independent, so the result is bit-identical to the scalar path.
    __m256i acc = _mm256_setzero_si256();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
        const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
        const __m256i even = _mm256_mul_epi32(va, vb);
        const __m256i odd =
            _mm256_mul_epi32(_mm256_srli_epi64(va, 32), _mm256_srli_epi64(vb, 32));
        acc = _mm256_add_epi64(acc, _mm256_add_epi64(even, odd));
    }
    alignas(32) std::int64_t lanes[4];
    _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc);
    std::int64_t sum = lanes[0] + lanes[1] + lanes[2] + lanes[3];
    for (; i < n; ++i)
        sum += static_cast<std::int64_t>(a[i]) * static_cast<std::int64_t>(b[i]);
    return sum;
}

}  // namespace polyrx::kernels::detail

#endif  // POLYRX_HAVE_AVX2
