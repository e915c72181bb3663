#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

// Runtime-dispatched arithmetic kernels used by the hot loops (convolution
// and dense multiply-accumulate, both float and fixed-point). Every kernel
// has a scalar reference implementation; AVX2 (x86-64) and NEON (aarch64)
// variants are selected at startup when the CPU supports them and are
// equivalence-tested against the scalar reference.
//
// Contract notes:
//  - dot_q32 accumulates 32x32->64-bit products in wrapping int64, which is
//    order-independent, so every backend returns bit-identical results.
//  - dot_f32 / axpy_f32 results may differ from scalar by normal
//    reassociation/FMA rounding; within one process one backend is active,
//    so repeated calls are bit-reproducible.
//
// POLYRX_KERNELS=scalar|avx2|neon|auto in the environment overrides the
// automatic choice (falls back to scalar if the request is unavailable).
namespace polyrx::kernels {

enum class Backend { Scalar, Avx2, Neon };

Backend active_backend();
const char* backend_name(Backend b);

// Returns false if the requested backend is not available on this CPU
// (the scalar backend is always available).
bool set_backend(Backend b);

// sum_i a[i] * b[i]
float dot_f32(const float* a, const float* b, std::size_t n);

// y[i] += alpha * x[i]
void axpy_f32(float alpha, const float* x, float* y, std::size_t n);

// sum_i (int64)a[i] * (int64)b[i], wrapping int64 accumulation.
std::int64_t dot_q32(const std::int32_t* a, const std::int32_t* b, std::size_t n);

// Fused four-row variants; each x element is loaded once and used against
// four weight rows, which keeps batched dense layers compute-bound instead
// of re-streaming the weight matrix.
// out[j] = sum_i x[i] * w[j][i]
void dot4_f32(const float* x, const float* const w[4], std::size_t n, float out[4]);
// y[j][i] += a[j] * x[i]
void axpy4_f32(const float a[4], const float* x, float* const y[4], std::size_t n);
// y[i] += sum_j a[j] * w[j][i]
void waxpy4_f32(const float a[4], const float* const w[4], float* y, std::size_t n);

namespace detail {
float dot_f32_scalar(const float* a, const float* b, std::size_t n);
void axpy_f32_scalar(float alpha, const float* x, float* y, std::size_t n);
std::int64_t dot_q32_scalar(const std::int32_t* a, const std::int32_t* b, std::size_t n);
void dot4_f32_scalar(const float* x, const float* const w[4], std::size_t n, float out[4]);
void axpy4_f32_scalar(const float a[4], const float* x, float* const y[4], std::size_t n);
void waxpy4_f32_scalar(const float a[4], const float* const w[4], float* y, std::size_t n);

#if defined(POLYRX_HAVE_AVX2)
float dot_f32_avx2(const float* a, const float* b, std::size_t n);
void axpy_f32_avx2(float alpha, const float* x, float* y, std::size_t n);
std::int64_t dot_q32_avx2(const std::int32_t* a, const std::int32_t* b, std::size_t n);
void dot4_f32_avx2(const float* x, const float* const w[4], std::size_t n, float out[4]);
void axpy4_f32_avx2(const float a[4], const float* x, float* const y[4], std::size_t n);
void waxpy4_f32_avx2(const float a[4], const float* const w[4], float* y, std::size_t n);
#endif

#if defined(__ARM_NEON) || defined(__aarch64__)
float dot_f32_neon(const float* a, const float* b, std::size_t n);
void axpy_f32_neon(float alpha, const float* x, float* y, std::size_t n);
std::int64_t dot_q32_neon(const std::int32_t* a, const std::int32_t* b, std::size_t n);
void dot4_f32_neon(const float* x, const float* const w[4], std::size_t n, float out[4]);
void axpy4_f32_neon(const float a[4], const float* x, float* const y[4], std::size_t n);
void waxpy4_f32_neon(const float a[4], const float* const w[4], float* y, std::size_t n);
#endif
}  // namespace detail

}  // namespace polyrx::kernels
