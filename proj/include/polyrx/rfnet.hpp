#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "polyrx/fixed_point.hpp"
#include "polyrx/rftensor.hpp"

namespace polyrx {

// Architecture descriptor: m conv layers (square f x f filters, valid
// padding, ReLU), flatten, k hidden dense layers (ReLU), then a final affine
// layer to n_classes and softmax. The final layer always exists, so k counts
// hidden dense layers only. m == 0 means a dense-only network on the
// flattened input (used by the dense baseline).
struct RfnetArch {
    int m = 1;
    std::vector<int> conv_filters;  // size m
    int f = 3;
    int k = 0;
    std::vector<int> dense_units;  // size k
    int input_w = 20;
    int input_h = 20;
    int n_classes = 2;

    void validate() const;

    int conv_out_w(int layer) const { return input_w - (layer + 1) * (f - 1); }
    int conv_out_h(int layer) const { return input_h - (layer + 1) * (f - 1); }
    int conv_in_depth(int layer) const { return layer == 0 ? 2 : conv_filters[layer - 1]; }
    // Flattened size feeding the first dense layer.
    std::size_t flat_size() const;
    std::size_t param_count() const;

    bool operator==(const RfnetArch&) const = default;
};

// One conv layer's parameters. Filters are stored per output channel,
// flattened in (row, col, depth) order so that a filter can be applied as a
// single dot product against a gathered window.
template <typename T>
struct ConvLayer {
    std::vector<T> filters;  // c * (f * f * depth_in)
    std::vector<T> biases;   // c
};

// Dense layer, weights row-major (out_dim x in_dim).
template <typename T>
struct DenseLayer {
    std::vector<T> weights;
    std::vector<T> biases;
};

template <typename T>
struct Params {
    std::vector<ConvLayer<T>> conv;
    std::vector<DenseLayer<T>> dense;  // k hidden layers + output layer
};

using FloatParams = Params<float>;
using QuantizedParams = Params<std::int32_t>;

struct ClassPrediction {
    std::vector<double> probs;
    int argmax = 0;
};

// Architecture plus parameters in one record. Exactly one of the two
// parameter sets is present depending on how the model was produced/loaded.
struct RfnetModel {
    RfnetArch arch;
    std::optional<FloatParams> float_params;
    std::optional<QuantizedParams> quant_params;
    FixedFormat format = FixedFormat::q10_22();
};

// Zero-initialized parameters with shapes matching `arch`.
FloatParams zero_params(const RfnetArch& arch);

// ---------------------------------------------------------------------------
// Reference layer operations (float). conv2d_valid is the direct-form
// convolution the streaming engine is checked against.
// ---------------------------------------------------------------------------

// Valid (no padding) cross-correlation over a w x h x depth_in input,
// filters spanning all input depths jointly. Output is (w-f+1) x (h-f+1) x c
// stored row-major with channel innermost.
std::vector<float> conv2d_valid(const float* input, int w, int h, int depth_in,
                                const ConvLayer<float>& layer, int f, int c);

std::vector<float> dense_forward(const std::vector<float>& x, const DenseLayer<float>& layer,
                                 int in_dim, int out_dim);

void relu_inplace(float* x, std::size_t n);

// Numerically-stable softmax (max subtraction), computed in double.
std::vector<double> softmax(const std::vector<double>& logits);

// Lowest index wins ties.
int argmax_index(const std::vector<double>& probs);

// Full float forward pass.
ClassPrediction forward_float(const RfnetArch& arch, const FloatParams& params, const RfTensor& t);

// Logits before softmax (used by tests and the trainer).
std::vector<double> forward_float_logits(const RfnetArch& arch, const FloatParams& params,
                                         const RfTensor& t);

// ---------------------------------------------------------------------------
// Fixed point
// ---------------------------------------------------------------------------

// Per-scalar quantization: round to nearest, saturate at the rails.
QuantizedParams quantize(const FloatParams& p, const FixedFormat& fmt);
FloatParams dequantize(const QuantizedParams& p, const FixedFormat& fmt);

// Fixed-point forward pass: the input tensor is quantized on entry, every
// multiply-accumulate runs in a 64-bit accumulator with a single
// round-half-away-from-zero rescale (saturating) per output element, ReLU is
// exact, and the final softmax runs on the dequantized logits.
ClassPrediction forward_fixed(const RfnetArch& arch, const QuantizedParams& params,
                              const RfTensor& t, const FixedFormat& fmt);

std::vector<double> forward_fixed_logits(const RfnetArch& arch, const QuantizedParams& params,
                                         const RfTensor& t, const FixedFormat& fmt);

// Direct-form fixed-point convolution (the streaming reference).
std::vector<std::int32_t> conv2d_valid_fixed(const std::int32_t* input, int w, int h, int depth_in,
                                             const ConvLayer<std::int32_t>& layer, int f, int c,
                                             const FixedFormat& fmt);

// Runs the model on the prediction path appropriate for `mode`.
enum class InferenceMode { Float, Fixed };
ClassPrediction predict(const RfnetModel& model, const RfTensor& t, InferenceMode mode);

// ---------------------------------------------------------------------------
// Streaming convolution (line buffer + window buffer cycle model)
// ---------------------------------------------------------------------------

// Cycle accounting of the streaming engine: the line buffers hold the first
// f rows after f * w sample insertions, the first window assembles in f
// column shifts, then one output window retires per cycle.
struct StreamingCycles {
    std::uint64_t line_fill = 0;     // f * w
    std::uint64_t window_prime = 0;  // f
    std::uint64_t outputs = 0;       // (w-f+1) * (h-f+1)
    std::uint64_t total() const { return line_fill + window_prime + outputs; }
};

template <typename T>
struct StreamingResult {
    std::vector<T> output;
    StreamingCycles cycles;
};

// Consumes the input one sample (all depths) per tick in raster order and
// emits outputs in raster order. Each window is evaluated with exactly the
// same gather order and kernel as the direct form, so the output matches
// conv2d_valid bit for bit. Requires f >= 2 and w, h >= f.
StreamingResult<float> streaming_conv(const float* input, int w, int h, int depth_in,
                                      const ConvLayer<float>& layer, int f, int c);

StreamingResult<std::int32_t> streaming_conv_fixed(const std::int32_t* input, int w, int h,
                                                   int depth_in, const ConvLayer<std::int32_t>& layer,
                                                   int f, int c, const FixedFormat& fmt);

}  // namespace polyrx
