#pragma once

// Shared layer arithmetic, templated on the scalar type. The float
// instantiation routes through the runtime-dispatched SIMD kernels; other
// types (double for gradient checking) use plain loops. Both the direct and
// the streaming convolution assemble each window in (row, col, depth) order
// and reduce it with the same dot kernel, which is what makes them agree
// bit for bit.

#include <cstring>
#include <vector>

#include "polyrx/kernels.hpp"
#include "polyrx/rfnet.hpp"

namespace polyrx::netcore {

template <typename T>
inline T dot(const T* a, const T* b, std::size_t n) {
    if constexpr (std::is_same_v<T, float>) {
        return kernels::dot_f32(a, b, n);
    } else {
        T acc = 0;
        for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
        return acc;
    }
}

template <typename T>
inline void axpy(T alpha, const T* x, T* y, std::size_t n) {
    if constexpr (std::is_same_v<T, float>) {
        kernels::axpy_f32(alpha, x, y, n);
    } else {
        for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
    }
}

// Copies the f x f x din window with top-left (x0, y0) out of a
// (w x h x din) row-major image into `out`, ordered (row, col, depth).
template <typename T>
inline void gather_window(const T* input, int w, int din, int x0, int y0, int f, T* out) {
    const std::size_t run = static_cast<std::size_t>(f) * din;
    for (int fr = 0; fr < f; ++fr) {
        const T* src = input + (static_cast<std::size_t>(y0 + fr) * w + x0) * din;
        std::memcpy(out + static_cast<std::size_t>(fr) * run, src, run * sizeof(T));
    }
}

// im2col: every valid window as one row of `patches`
// ((out_w*out_h) x (f*f*din)), raster order.
template <typename T>
inline void im2col(const T* input, int w, int h, int din, int f, T* patches) {
    const int out_w = w - f + 1;
    const int out_h = h - f + 1;
    const std::size_t k = static_cast<std::size_t>(f) * f * din;
    for (int y = 0; y < out_h; ++y)
        for (int x = 0; x < out_w; ++x)
            gather_window(input, w, din, x, y, f, patches + (static_cast<std::size_t>(y) * out_w + x) * k);
}

// Scatter-add of im2col-row gradients back onto the input image.
template <typename T>
inline void col2im_add(const T* patches, int w, int h, int din, int f, T* d_input) {
    const int out_w = w - f + 1;
    const int out_h = h - f + 1;
    const std::size_t run = static_cast<std::size_t>(f) * din;
    for (int y = 0; y < out_h; ++y) {
        for (int x = 0; x < out_w; ++x) {
            const T* row = patches + (static_cast<std::size_t>(y) * out_w + x) * run * f;
            for (int fr = 0; fr < f; ++fr) {
                T* dst = d_input + (static_cast<std::size_t>(y + fr) * w + x) * din;
                const T* src = row + static_cast<std::size_t>(fr) * run;
                for (std::size_t i = 0; i < run; ++i) dst[i] += src[i];
            }
        }
    }
}

// out[(y*out_w + x)*c + ch] = bias[ch] + <window(y,x), filter[ch]>
// `patches` must hold im2col(input); it is reused by the backward pass.
template <typename T>
inline void conv_forward_patches(const T* patches, int out_w, int out_h, std::size_t k,
                                 const ConvLayer<T>& layer, int c, T* out) {
    const std::size_t n_win = static_cast<std::size_t>(out_w) * out_h;
    for (std::size_t win = 0; win < n_win; ++win) {
        const T* p = patches + win * k;
        T* o = out + win * c;
        for (int ch = 0; ch < c; ++ch)
            o[ch] = layer.biases[ch] + dot(p, layer.filters.data() + static_cast<std::size_t>(ch) * k, k);
    }
}

template <typename T>
inline void dense_forward_into(const T* x, const DenseLayer<T>& layer, int in_dim, int out_dim,
                               T* y) {
    for (int o = 0; o < out_dim; ++o)
        y[o] = layer.biases[o] + dot(x, layer.weights.data() + static_cast<std::size_t>(o) * in_dim,
                                     static_cast<std::size_t>(in_dim));
}

template <typename T>
inline void dot4(const T* x, const T* const w[4], std::size_t n, T out[4]) {
    if constexpr (std::is_same_v<T, float>) {
        kernels::dot4_f32(x, w, n, out);
    } else {
        T s0 = 0, s1 = 0, s2 = 0, s3 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const T xi = x[i];
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
}

template <typename T>
inline void axpy4(const T a[4], const T* x, T* const y[4], std::size_t n) {
    if constexpr (std::is_same_v<T, float>) {
        kernels::axpy4_f32(a, x, y, n);
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const T xi = x[i];
            y[0][i] += a[0] * xi;
            y[1][i] += a[1] * xi;
            y[2][i] += a[2] * xi;
            y[3][i] += a[3] * xi;
        }
    }
}

template <typename T>
inline void waxpy4(const T a[4], const T* const w[4], T* y, std::size_t n) {
    if constexpr (std::is_same_v<T, float>) {
        kernels::waxpy4_f32(a, w, y, n);
    } else {
        for (std::size_t i = 0; i < n; ++i)
            y[i] += a[0] * w[0][i] + a[1] * w[1][i] + a[2] * w[2][i] + a[3] * w[3][i];
    }
}

// Batched dense layer: rows of X/Y are samples. Output rows are processed
// four at a time so each weight row is streamed once per block instead of
// once per sample.
template <typename T>
inline void dense_forward_batch(const T* X, std::size_t bsz, const DenseLayer<T>& layer,
                                std::size_t in, std::size_t out, T* Y) {
    std::size_t o = 0;
    for (; o + 4 <= out; o += 4) {
        const T* w[4] = {layer.weights.data() + (o + 0) * in, layer.weights.data() + (o + 1) * in,
                         layer.weights.data() + (o + 2) * in, layer.weights.data() + (o + 3) * in};
        for (std::size_t s = 0; s < bsz; ++s) {
            T r[4];
            dot4(X + s * in, w, in, r);
            T* y = Y + s * out + o;
            for (int j = 0; j < 4; ++j) y[j] = r[j] + layer.biases[o + j];
        }
    }
    for (; o < out; ++o) {
        const T* w = layer.weights.data() + o * in;
        for (std::size_t s = 0; s < bsz; ++s)
            Y[s * out + o] = layer.biases[o] + dot(X + s * in, w, in);
    }
}

// Accumulates dW/db from (X, G) and, when dX is non-null, writes the
// gradient w.r.t. X (dX must be zero-filled by the caller).
template <typename T>
inline void dense_backward_batch(const T* X, const T* G, std::size_t bsz,
                                 const DenseLayer<T>& layer, std::size_t in, std::size_t out,
                                 DenseLayer<T>& grad, T* dX) {
    std::size_t o = 0;
    for (; o + 4 <= out; o += 4) {
        T* dw[4] = {grad.weights.data() + (o + 0) * in, grad.weights.data() + (o + 1) * in,
                    grad.weights.data() + (o + 2) * in, grad.weights.data() + (o + 3) * in};
        const T* w[4] = {layer.weights.data() + (o + 0) * in, layer.weights.data() + (o + 1) * in,
                         layer.weights.data() + (o + 2) * in, layer.weights.data() + (o + 3) * in};
        T bsum[4] = {0, 0, 0, 0};
        for (std::size_t s = 0; s < bsz; ++s) {
            T a[4];
            const T* g = G + s * out + o;
            for (int j = 0; j < 4; ++j) {
                a[j] = g[j];
                bsum[j] += g[j];
            }
            axpy4(a, X + s * in, dw, in);
            if (dX) waxpy4(a, w, dX + s * in, in);
        }
        for (int j = 0; j < 4; ++j) grad.biases[o + j] += bsum[j];
    }
    for (; o < out; ++o) {
        T* dw = grad.weights.data() + o * in;
        const T* w = layer.weights.data() + o * in;
        for (std::size_t s = 0; s < bsz; ++s) {
            const T g = G[s * out + o];
            if (g == T(0)) continue;
            axpy(g, X + s * in, dw, in);
            grad.biases[o] += g;
            if (dX) axpy(g, w, dX + s * in, in);
        }
    }
}

template <typename T>
inline void relu(T* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        if (x[i] < T(0)) x[i] = T(0);
}

}  // namespace polyrx::netcore
