#include "polyrx/rfnet.hpp"

#include <algorithm>
#include <cmath>

#include "net_core.hpp"
#include "polyrx/errors.hpp"

namespace polyrx {

void RfnetArch::validate() const {
    if (m < 0) throw ParamError("m must be >= 0");
    if (static_cast<int>(conv_filters.size()) != m) throw ParamError("conv_filters must have m entries");
    for (int c : conv_filters)
        if (c < 1) throw ParamError("conv filter counts must be >= 1");
    if (m > 0 && f < 1) throw ParamError("filter side must be >= 1");
    if (k < 0) throw ParamError("k must be >= 0");
    if (static_cast<int>(dense_units.size()) != k) throw ParamError("dense_units must have k entries");
    for (int d : dense_units)
        if (d < 1) throw ParamError("dense unit counts must be >= 1");
    if (input_w < 1 || input_h < 1) throw ParamError("input size must be >= 1");
    if (n_classes < 2) throw ParamError("n_classes must be >= 2");
    if (m > 0 && (conv_out_w(m - 1) < 1 || conv_out_h(m - 1) < 1))
        throw ParamError("convolution stack shrinks the input below 1x1");
}

std::size_t RfnetArch::flat_size() const {
    if (m == 0) return static_cast<std::size_t>(input_w) * input_h * 2;
    return static_cast<std::size_t>(conv_out_w(m - 1)) * conv_out_h(m - 1) *
           conv_filters[static_cast<std::size_t>(m) - 1];
}

std::size_t RfnetArch::param_count() const {
    std::size_t n = 0;
    for (int layer = 0; layer < m; ++layer) {
        const std::size_t c = static_cast<std::size_t>(conv_filters[layer]);
        n += c * (static_cast<std::size_t>(f) * f * conv_in_depth(layer)) + c;
    }
    std::size_t in_dim = flat_size();
    for (int j = 0; j < k; ++j) {
        const std::size_t d = static_cast<std::size_t>(dense_units[j]);
        n += d * in_dim + d;
        in_dim = d;
    }
    n += static_cast<std::size_t>(n_classes) * in_dim + static_cast<std::size_t>(n_classes);
    return n;
}

FloatParams zero_params(const RfnetArch& arch) {
    arch.validate();
    FloatParams p;
    for (int layer = 0; layer < arch.m; ++layer) {
        ConvLayer<float> cl;
        const std::size_t k = static_cast<std::size_t>(arch.f) * arch.f * arch.conv_in_depth(layer);
        cl.filters.assign(static_cast<std::size_t>(arch.conv_filters[layer]) * k, 0.0f);
        cl.biases.assign(static_cast<std::size_t>(arch.conv_filters[layer]), 0.0f);
        p.conv.push_back(std::move(cl));
    }
    std::size_t in_dim = arch.flat_size();
    for (int j = 0; j < arch.k; ++j) {
        DenseLayer<float> dl;
        dl.weights.assign(static_cast<std::size_t>(arch.dense_units[j]) * in_dim, 0.0f);
        dl.biases.assign(static_cast<std::size_t>(arch.dense_units[j]), 0.0f);
        p.dense.push_back(std::move(dl));
        in_dim = static_cast<std::size_t>(arch.dense_units[j]);
    }
    DenseLayer<float> out;
    out.weights.assign(static_cast<std::size_t>(arch.n_classes) * in_dim, 0.0f);
    out.biases.assign(static_cast<std::size_t>(arch.n_classes), 0.0f);
    p.dense.push_back(std::move(out));
    return p;
}

// ---------------------------------------------------------------------------
// Reference float layers
// ---------------------------------------------------------------------------

std::vector<float> conv2d_valid(const float* input, int w, int h, int depth_in,
                                const ConvLayer<float>& layer, int f, int c) {
    if (f < 1 || f > w || f > h) throw ShapeError("filter does not fit the input");
    const std::size_t k = static_cast<std::size_t>(f) * f * depth_in;
    if (layer.filters.size() != k * static_cast<std::size_t>(c) ||
        layer.biases.size() != static_cast<std::size_t>(c))
        throw ShapeError("conv parameter shapes do not match");
    const int out_w = w - f + 1;
    const int out_h = h - f + 1;
    std::vector<float> patches(static_cast<std::size_t>(out_w) * out_h * k);
    netcore::im2col(input, w, h, depth_in, f, patches.data());
    std::vector<float> out(static_cast<std::size_t>(out_w) * out_h * c);
    netcore::conv_forward_patches(patches.data(), out_w, out_h, k, layer, c, out.data());
    return out;
}

std::vector<float> dense_forward(const std::vector<float>& x, const DenseLayer<float>& layer,
                                 int in_dim, int out_dim) {
    if (static_cast<int>(x.size()) != in_dim ||
        layer.weights.size() != static_cast<std::size_t>(in_dim) * out_dim ||
        layer.biases.size() != static_cast<std::size_t>(out_dim))
        throw ShapeError("dense parameter shapes do not match");
    std::vector<float> y(static_cast<std::size_t>(out_dim));
    netcore::dense_forward_into(x.data(), layer, in_dim, out_dim, y.data());
    return y;
}

void relu_inplace(float* x, std::size_t n) { netcore::relu(x, n); }

std::vector<double> softmax(const std::vector<double>& logits) {
    std::vector<double> p(logits.size());
    const double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - mx);
        sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
}

int argmax_index(const std::vector<double>& probs) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(probs.size()); ++i)
        if (probs[i] > probs[best]) best = i;
    return best;
}

namespace {

void check_input(const RfnetArch& arch, const RfTensor& t) {
    if (t.w != arch.input_w || t.h != arch.input_h)
        throw ShapeError("tensor is " + std::to_string(t.w) + "x" + std::to_string(t.h) +
                         ", model expects " + std::to_string(arch.input_w) + "x" +
                         std::to_string(arch.input_h));
}

void check_params(const RfnetArch& arch, std::size_t n_conv, std::size_t n_dense) {
    if (n_conv != static_cast<std::size_t>(arch.m) ||
        n_dense != static_cast<std::size_t>(arch.k) + 1)
        throw ShapeError("parameter record does not match the architecture");
}

}  // namespace

std::vector<double> forward_float_logits(const RfnetArch& arch, const FloatParams& params,
                                         const RfTensor& t) {
    arch.validate();
    check_input(arch, t);
    check_params(arch, params.conv.size(), params.dense.size());

    std::vector<float> act = t.data;
    int w = arch.input_w, h = arch.input_h, din = 2;
    for (int layer = 0; layer < arch.m; ++layer) {
        const int c = arch.conv_filters[layer];
        act = conv2d_valid(act.data(), w, h, din, params.conv[layer], arch.f, c);
        netcore::relu(act.data(), act.size());
        w = arch.conv_out_w(layer);
        h = arch.conv_out_h(layer);
        din = c;
    }
    int in_dim = static_cast<int>(act.size());
    for (int j = 0; j < arch.k; ++j) {
        act = dense_forward(act, params.dense[j], in_dim, arch.dense_units[j]);
        netcore::relu(act.data(), act.size());
        in_dim = arch.dense_units[j];
    }
    act = dense_forward(act, params.dense.back(), in_dim, arch.n_classes);
    return std::vector<double>(act.begin(), act.end());
}

ClassPrediction forward_float(const RfnetArch& arch, const FloatParams& params, const RfTensor& t) {
    ClassPrediction pred;
    pred.probs = softmax(forward_float_logits(arch, params, t));
    pred.argmax = argmax_index(pred.probs);
    return pred;
}

// ---------------------------------------------------------------------------
// Fixed point
// ---------------------------------------------------------------------------

QuantizedParams quantize(const FloatParams& p, const FixedFormat& fmt) {
    QuantizedParams q;
    for (const auto& cl : p.conv) {
        ConvLayer<std::int32_t> out;
        out.filters.reserve(cl.filters.size());
        out.biases.reserve(cl.biases.size());
        for (float v : cl.filters) out.filters.push_back(fixed_from_real(v, fmt));
        for (float v : cl.biases) out.biases.push_back(fixed_from_real(v, fmt));
        q.conv.push_back(std::move(out));
    }
    for (const auto& dl : p.dense) {
        DenseLayer<std::int32_t> out;
        out.weights.reserve(dl.weights.size());
        out.biases.reserve(dl.biases.size());
        for (float v : dl.weights) out.weights.push_back(fixed_from_real(v, fmt));
        for (float v : dl.biases) out.biases.push_back(fixed_from_real(v, fmt));
        q.dense.push_back(std::move(out));
    }
    return q;
}

FloatParams dequantize(const QuantizedParams& p, const FixedFormat& fmt) {
    FloatParams f;
    for (const auto& cl : p.conv) {
        ConvLayer<float> out;
        for (std::int32_t v : cl.filters) out.filters.push_back(static_cast<float>(fixed_to_real(v, fmt)));
        for (std::int32_t v : cl.biases) out.biases.push_back(static_cast<float>(fixed_to_real(v, fmt)));
        f.conv.push_back(std::move(out));
    }
    for (const auto& dl : p.dense) {
        DenseLayer<float> out;
        for (std::int32_t v : dl.weights) out.weights.push_back(static_cast<float>(fixed_to_real(v, fmt)));
        for (std::int32_t v : dl.biases) out.biases.push_back(static_cast<float>(fixed_to_real(v, fmt)));
        f.dense.push_back(std::move(out));
    }
    return f;
}

namespace {

// One output element: widened accumulate, bias aligned to the product scale,
// single round/saturate back to storage precision.
inline std::int32_t mac_window_fixed(const std::int32_t* window, const std::int32_t* filter,
                                     std::size_t k, std::int32_t bias, const FixedFormat& fmt) {
    std::int64_t acc = static_cast<std::int64_t>(bias) << fmt.frac_bits();
    acc += kernels::dot_q32(window, filter, k);
    return fixed_rescale(acc, fmt);
}

}  // namespace

std::vector<std::int32_t> conv2d_valid_fixed(const std::int32_t* input, int w, int h, int depth_in,
                                             const ConvLayer<std::int32_t>& layer, int f, int c,
                                             const FixedFormat& fmt) {
    if (f < 1 || f > w || f > h) throw ShapeError("filter does not fit the input");
    const std::size_t k = static_cast<std::size_t>(f) * f * depth_in;
    if (layer.filters.size() != k * static_cast<std::size_t>(c) ||
        layer.biases.size() != static_cast<std::size_t>(c))
        throw ShapeError("conv parameter shapes do not match");
    const int out_w = w - f + 1;
    const int out_h = h - f + 1;
    std::vector<std::int32_t> window(k);
    std::vector<std::int32_t> out(static_cast<std::size_t>(out_w) * out_h * c);
    for (int y = 0; y < out_h; ++y) {
        for (int x = 0; x < out_w; ++x) {
            netcore::gather_window(input, w, depth_in, x, y, f, window.data());
            std::int32_t* o = out.data() + (static_cast<std::size_t>(y) * out_w + x) * c;
            for (int ch = 0; ch < c; ++ch)
                o[ch] = mac_window_fixed(window.data(), layer.filters.data() + static_cast<std::size_t>(ch) * k,
                                         k, layer.biases[ch], fmt);
        }
    }
    return out;
}

std::vector<double> forward_fixed_logits(const RfnetArch& arch, const QuantizedParams& params,
                                         const RfTensor& t, const FixedFormat& fmt) {
    arch.validate();
    check_input(arch, t);
    check_params(arch, params.conv.size(), params.dense.size());

    std::vector<std::int32_t> act(t.data.size());
    for (std::size_t i = 0; i < t.data.size(); ++i) act[i] = fixed_from_real(t.data[i], fmt);

    int w = arch.input_w, h = arch.input_h, din = 2;
    for (int layer = 0; layer < arch.m; ++layer) {
        const int c = arch.conv_filters[layer];
        act = conv2d_valid_fixed(act.data(), w, h, din, params.conv[layer], arch.f, c, fmt);
        for (std::int32_t& v : act)
            if (v < 0) v = 0;  // ReLU is exact in fixed point
        w = arch.conv_out_w(layer);
        h = arch.conv_out_h(layer);
        din = c;
    }

    std::size_t in_dim = act.size();
    for (int j = 0; j <= arch.k; ++j) {
        const auto& dl = params.dense[j];
        const int out_dim = (j == arch.k) ? arch.n_classes : arch.dense_units[j];
        if (dl.weights.size() != in_dim * static_cast<std::size_t>(out_dim) ||
            dl.biases.size() != static_cast<std::size_t>(out_dim))
            throw ShapeError("dense parameter shapes do not match");
        std::vector<std::int32_t> next(static_cast<std::size_t>(out_dim));
        for (int o = 0; o < out_dim; ++o)
            next[o] = mac_window_fixed(act.data(), dl.weights.data() + static_cast<std::size_t>(o) * in_dim,
                                       in_dim, dl.biases[o], fmt);
        if (j < arch.k) {
            for (std::int32_t& v : next)
                if (v < 0) v = 0;
        }
        act = std::move(next);
        in_dim = act.size();
    }

    std::vector<double> logits(act.size());
    for (std::size_t i = 0; i < act.size(); ++i) logits[i] = fixed_to_real(act[i], fmt);
    return logits;
}

ClassPrediction forward_fixed(const RfnetArch& arch, const QuantizedParams& params,
                              const RfTensor& t, const FixedFormat& fmt) {
    ClassPrediction pred;
    // The dequantization is monotone, so softmax on dequantized logits keeps
    // the fixed-point argmax.
    pred.probs = softmax(forward_fixed_logits(arch, params, t, fmt));
    pred.argmax = argmax_index(pred.probs);
    return pred;
}

ClassPrediction predict(const RfnetModel& model, const RfTensor& t, InferenceMode mode) {
    if (mode == InferenceMode::Float) {
        if (!model.float_params) throw ParamError("model has no float parameters");
        return forward_float(model.arch, *model.float_params, t);
    }
    if (!model.quant_params) throw ParamError("model has no quantized parameters");
    return forward_fixed(model.arch, *model.quant_params, t, model.format);
}

// ---------------------------------------------------------------------------
// Streaming convolution
// ---------------------------------------------------------------------------

namespace {

// Functional model of the line-buffer + window-buffer engine: samples enter
// one per tick in raster order; the last f rows stay resident; once the
// window straddles valid data, each new sample slides the window one column
// and one output retires per tick. Window contents are gathered in the same
// (row, col, depth) order as the direct form and reduced with the same
// kernel, so outputs are identical, not merely close.
template <typename T, typename Mac>
StreamingResult<T> run_streaming(const T* input, int w, int h, int depth_in, int f, int c,
                                 std::size_t filter_len, Mac&& mac) {
    if (f < 2) throw ShapeError("streaming engine needs f >= 2");
    if (w < f || h < f) throw ShapeError("streaming engine needs w, h >= f");

    const int out_w = w - f + 1;
    const int out_h = h - f + 1;
    StreamingResult<T> res;
    res.output.resize(static_cast<std::size_t>(out_w) * out_h * c);
    res.cycles.line_fill = static_cast<std::uint64_t>(f) * static_cast<std::uint64_t>(w);
    res.cycles.window_prime = static_cast<std::uint64_t>(f);
    res.cycles.outputs = static_cast<std::uint64_t>(out_w) * static_cast<std::uint64_t>(out_h);

    // f - 1 line buffers plus the row currently streaming in.
    std::vector<T> rows(static_cast<std::size_t>(f) * w * depth_in, T(0));
    std::vector<T> window(filter_len);

    for (int r = 0; r < h; ++r) {
        T* row_buf = rows.data() + static_cast<std::size_t>(r % f) * w * depth_in;
        for (int col = 0; col < w; ++col) {
            // One sample (all depths) arrives this tick.
            const T* sample = input + (static_cast<std::size_t>(r) * w + col) * depth_in;
            std::copy(sample, sample + depth_in, row_buf + static_cast<std::size_t>(col) * depth_in);

            if (r >= f - 1 && col >= f - 1) {
                const int y0 = r - f + 1;
                const int x0 = col - f + 1;
                const std::size_t run = static_cast<std::size_t>(f) * depth_in;
                for (int fr = 0; fr < f; ++fr) {
                    const T* src = rows.data() +
                                   (static_cast<std::size_t>((y0 + fr) % f) * w + x0) * depth_in;
                    std::copy(src, src + run, window.data() + static_cast<std::size_t>(fr) * run);
                }
                T* o = res.output.data() + (static_cast<std::size_t>(y0) * out_w + x0) * c;
                for (int ch = 0; ch < c; ++ch) o[ch] = mac(window.data(), ch);
            }
        }
    }
    return res;
}

}  // namespace

StreamingResult<float> streaming_conv(const float* input, int w, int h, int depth_in,
                                      const ConvLayer<float>& layer, int f, int c) {
    const std::size_t k = static_cast<std::size_t>(f) * f * depth_in;
    if (layer.filters.size() != k * static_cast<std::size_t>(c) ||
        layer.biases.size() != static_cast<std::size_t>(c))
        throw ShapeError("conv parameter shapes do not match");
    return run_streaming<float>(input, w, h, depth_in, f, c, k,
                                [&](const float* window, int ch) {
                                    return layer.biases[ch] +
                                           netcore::dot(window, layer.filters.data() +
                                                                    static_cast<std::size_t>(ch) * k,
                                                        k);
                                });
}

StreamingResult<std::int32_t> streaming_conv_fixed(const std::int32_t* input, int w, int h,
                                                   int depth_in,
                                                   const ConvLayer<std::int32_t>& layer, int f,
                                                   int c, const FixedFormat& fmt) {
    const std::size_t k = static_cast<std::size_t>(f) * f * depth_in;
    if (layer.filters.size() != k * static_cast<std::size_t>(c) ||
        layer.biases.size() != static_cast<std::size_t>(c))
        throw ShapeError("conv parameter shapes do not match");
    return run_streaming<std::int32_t>(
        input, w, h, depth_in, f, c, k, [&](const std::int32_t* window, int ch) {
            return mac_window_fixed(window, layer.filters.data() + static_cast<std::size_t>(ch) * k,
                                    k, layer.biases[ch], fmt);
        });
}

}  // namespace polyrx
