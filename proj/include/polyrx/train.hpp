#pragma once

#include <cstdint>
#include <vector>

#include "polyrx/rfnet.hpp"

namespace polyrx {

struct TrainConfig {
    double learning_rate = 1e-4;
    double l2_lambda = 1e-4;  // loss += l2_lambda * sum w^2 (weights only, not biases)
    // Adam moments
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int batch_size = 32;
    int epochs = 10;
    std::uint64_t seed = 1;
};

struct TrainResult {
    FloatParams params;
    std::vector<double> epoch_loss;      // mean objective per epoch
    std::vector<double> epoch_accuracy;  // training accuracy per epoch
};

// Minimizes categorical cross-entropy + L2 with Adam over seeded minibatches.
// Deterministic given cfg.seed. Throws TrainingError if the loss goes
// non-finite.
TrainResult train(const std::vector<RfTensor>& inputs, const std::vector<int>& labels,
                  const RfnetArch& arch, const TrainConfig& cfg);

// He-style uniform initialization (bound sqrt(6 / fan_in)), biases zero.
FloatParams init_params(const RfnetArch& arch, std::uint64_t seed);

// Fraction of inputs whose float-path argmax equals the label.
double evaluate_accuracy(const RfnetArch& arch, const FloatParams& params,
                         const std::vector<RfTensor>& inputs, const std::vector<int>& labels);

// Sum of squared weights (the L2 term without lambda).
double weight_norm_sq(const FloatParams& params);

namespace traindetail {

// Double-precision mirror of the forward/backward pass used for gradient
// verification. Layout matches FloatParams.
using ParamsD = Params<double>;

ParamsD to_double(const FloatParams& p);
FloatParams to_float(const ParamsD& p);

// Mean objective over the batch: cross-entropy + l2_lambda * ||w||^2.
double loss_only(const RfnetArch& arch, const ParamsD& p, const std::vector<RfTensor>& xs,
                 const std::vector<int>& ys, double l2_lambda);

// Analytic gradient of loss_only with respect to every parameter.
ParamsD gradient(const RfnetArch& arch, const ParamsD& p, const std::vector<RfTensor>& xs,
                 const std::vector<int>& ys, double l2_lambda);

}  // namespace traindetail

}  // namespace polyrx
