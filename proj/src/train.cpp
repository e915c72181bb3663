#include "polyrx/train.hpp"

#include <cmath>
#include <numeric>

#include "net_core.hpp"
#include "polyrx/errors.hpp"
#include "polyrx/rng.hpp"

namespace polyrx {

namespace {

template <typename T>
Params<T> zero_like(const RfnetArch& arch) {
    Params<T> p;
    for (int layer = 0; layer < arch.m; ++layer) {
        ConvLayer<T> cl;
        const std::size_t k = static_cast<std::size_t>(arch.f) * arch.f * arch.conv_in_depth(layer);
        cl.filters.assign(static_cast<std::size_t>(arch.conv_filters[layer]) * k, T(0));
        cl.biases.assign(static_cast<std::size_t>(arch.conv_filters[layer]), T(0));
        p.conv.push_back(std::move(cl));
    }
    std::size_t in_dim = arch.flat_size();
    for (int j = 0; j <= arch.k; ++j) {
        const std::size_t out = (j == arch.k) ? static_cast<std::size_t>(arch.n_classes)
                                              : static_cast<std::size_t>(arch.dense_units[j]);
        DenseLayer<T> dl;
        dl.weights.assign(out * in_dim, T(0));
        dl.biases.assign(out, T(0));
        p.dense.push_back(std::move(dl));
        in_dim = out;
    }
    return p;
}

template <typename T>
void fill_zero(Params<T>& p) {
    for (auto& cl : p.conv) {
        std::fill(cl.filters.begin(), cl.filters.end(), T(0));
        std::fill(cl.biases.begin(), cl.biases.end(), T(0));
    }
    for (auto& dl : p.dense) {
        std::fill(dl.weights.begin(), dl.weights.end(), T(0));
        std::fill(dl.biases.begin(), dl.biases.end(), T(0));
    }
}

struct ConvDims {
    int w, h, din, c, out_w, out_h;
    std::size_t k, n_win;
};

std::vector<ConvDims> conv_dims(const RfnetArch& arch) {
    std::vector<ConvDims> dims;
    int w = arch.input_w, h = arch.input_h, din = 2;
    for (int layer = 0; layer < arch.m; ++layer) {
        ConvDims d;
        d.w = w;
        d.h = h;
        d.din = din;
        d.c = arch.conv_filters[layer];
        d.out_w = w - arch.f + 1;
        d.out_h = h - arch.f + 1;
        d.k = static_cast<std::size_t>(arch.f) * arch.f * din;
        d.n_win = static_cast<std::size_t>(d.out_w) * d.out_h;
        dims.push_back(d);
        w = d.out_w;
        h = d.out_h;
        din = d.c;
    }
    return dims;
}

// Minibatch forward/backward engine. Convolutions run per sample in a
// feature-major scratch layout (patch rows of length n_win feed axpy/dot
// kernels); the dense stack runs batched so each weight row streams through
// the cache once per four-row block rather than once per sample. Activations
// stay feature-major end to end, so the first dense layer is trained against
// a channel-major flatten; export_params() permutes its weights back to the
// published window-major order.
template <typename T>
class Model {
public:
    Model(const RfnetArch& arch, std::size_t max_batch)
        : arch_(arch), dims_(conv_dims(arch)), max_batch_(max_batch) {
        for (const auto& d : dims_) {
            patches_t_.emplace_back(max_batch, std::vector<T>(d.n_win * d.k));
            act_t_.emplace_back(max_batch, std::vector<T>(d.n_win * static_cast<std::size_t>(d.c)));
            dact_a_.resize(std::max(dact_a_.size(), d.n_win * static_cast<std::size_t>(d.c)));
            dact_b_.resize(std::max(dact_b_.size(), d.n_win * static_cast<std::size_t>(d.c)));
            dpatches_t_.resize(std::max(dpatches_t_.size(), d.n_win * d.k));
            dinput_t_.resize(std::max(dinput_t_.size(), static_cast<std::size_t>(d.w) * d.h * d.din));
        }
        input_t_.resize(static_cast<std::size_t>(arch.input_w) * arch.input_h * 2);
        dense_dims_.push_back(arch.flat_size());
        for (int j = 0; j < arch.k; ++j)
            dense_dims_.push_back(static_cast<std::size_t>(arch.dense_units[j]));
        dense_dims_.push_back(static_cast<std::size_t>(arch.n_classes));
        for (std::size_t dim : dense_dims_) dense_x_.emplace_back(max_batch * dim);
        std::size_t g_max = 0;
        for (std::size_t dim : dense_dims_) g_max = std::max(g_max, dim);
        g_a_.resize(max_batch * g_max);
        g_b_.resize(max_batch * g_max);
        probs_.resize(static_cast<std::size_t>(arch.n_classes));
    }

    // Runs the batch forward (and backward when `grad` is non-null,
    // accumulating unnormalized gradients). Returns the summed
    // cross-entropy; `correct` counts argmax hits.
    double run_batch(const std::vector<RfTensor>& inputs, const std::vector<int>& labels,
                     const std::size_t* idx, std::size_t bsz, const Params<T>& p, Params<T>* grad,
                     std::size_t* correct) {
        // Conv stack per sample; flattened output lands in dense_x_[0].
        for (std::size_t s = 0; s < bsz; ++s) conv_forward(inputs[idx[s]], p, s);

        // Dense stack batched. dense_x_[j] holds the (post-ReLU) input of
        // layer j; the last entry receives the logits.
        for (int j = 0; j <= arch_.k; ++j) {
            netcore::dense_forward_batch(dense_x_[static_cast<std::size_t>(j)].data(), bsz,
                                         p.dense[static_cast<std::size_t>(j)], dense_dims_[j],
                                         dense_dims_[j + 1],
                                         dense_x_[static_cast<std::size_t>(j) + 1].data());
            if (j < arch_.k)
                netcore::relu(dense_x_[static_cast<std::size_t>(j) + 1].data(),
                              bsz * dense_dims_[j + 1]);
        }

        // Softmax + cross-entropy per sample, double precision.
        const std::size_t n_cls = dense_dims_.back();
        T* logits = dense_x_.back().data();
        T* g_last = g_a_.data();
        double ce_sum = 0.0;
        for (std::size_t s = 0; s < bsz; ++s) {
            const T* z = logits + s * n_cls;
            double mx = -1e300;
            for (std::size_t i = 0; i < n_cls; ++i) mx = std::max(mx, static_cast<double>(z[i]));
            double sum = 0.0;
            for (std::size_t i = 0; i < n_cls; ++i) {
                probs_[i] = std::exp(static_cast<double>(z[i]) - mx);
                sum += probs_[i];
            }
            int best = 0;
            for (std::size_t i = 0; i < n_cls; ++i) {
                probs_[i] /= sum;
                if (probs_[i] > probs_[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
            }
            const int y = labels[idx[s]];
            if (correct && best == y) ++*correct;
            ce_sum += -std::log(std::max(probs_[static_cast<std::size_t>(y)], 1e-300));
            if (grad) {
                T* g = g_last + s * n_cls;
                for (std::size_t i = 0; i < n_cls; ++i) {
                    g[i] = static_cast<T>(probs_[i]);
                    if (static_cast<int>(i) == y) g[i] -= T(1);
                }
            }
        }
        if (!grad) return ce_sum;

        // Dense backward, output layer first; g ping-pongs between buffers.
        T* g_cur = g_a_.data();
        T* g_next = g_b_.data();
        for (int j = arch_.k; j >= 0; --j) {
            const std::size_t in = dense_dims_[j];
            const std::size_t out = dense_dims_[j + 1];
            const bool need_dx = (j > 0) || (arch_.m > 0);
            if (need_dx) std::fill(g_next, g_next + bsz * in, T(0));
            netcore::dense_backward_batch(dense_x_[static_cast<std::size_t>(j)].data(), g_cur, bsz,
                                          p.dense[static_cast<std::size_t>(j)], in, out,
                                          grad->dense[static_cast<std::size_t>(j)],
                                          need_dx ? g_next : nullptr);
            if (j > 0) {
                // Mask through the hidden layer's ReLU.
                const T* a = dense_x_[static_cast<std::size_t>(j)].data();
                for (std::size_t i = 0; i < bsz * in; ++i)
                    if (a[i] <= T(0)) g_next[i] = T(0);
            }
            std::swap(g_cur, g_next);
        }

        if (arch_.m > 0)
            for (std::size_t s = 0; s < bsz; ++s) conv_backward(p, *grad, s, g_cur);
        return ce_sum;
    }

private:
    // patches_t[k][win] = window element k of window `win`, reading
    // feature-major input planes cur[dep][pos]. Rows copy contiguously.
    void im2col_t(const T* cur, const ConvDims& d, T* pt) const {
        const int f = arch_.f;
        const std::size_t plane = static_cast<std::size_t>(d.w) * d.h;
        std::size_t k = 0;
        for (int fr = 0; fr < f; ++fr) {
            for (int fc = 0; fc < f; ++fc) {
                for (int dep = 0; dep < d.din; ++dep, ++k) {
                    T* dst = pt + k * d.n_win;
                    const T* src0 = cur + static_cast<std::size_t>(dep) * plane;
                    for (int y = 0; y < d.out_h; ++y) {
                        const T* src = src0 + static_cast<std::size_t>(y + fr) * d.w + fc;
                        std::copy(src, src + d.out_w, dst + static_cast<std::size_t>(y) * d.out_w);
                    }
                }
            }
        }
    }

    // Transpose of im2col_t: scatter-adds patch-row gradients back onto the
    // feature-major input planes.
    void col2im_t(const T* dpt, const ConvDims& d, T* dinput) const {
        const int f = arch_.f;
        const std::size_t plane = static_cast<std::size_t>(d.w) * d.h;
        std::size_t k = 0;
        for (int fr = 0; fr < f; ++fr) {
            for (int fc = 0; fc < f; ++fc) {
                for (int dep = 0; dep < d.din; ++dep, ++k) {
                    const T* srow = dpt + k * d.n_win;
                    T* dst0 = dinput + static_cast<std::size_t>(dep) * plane;
                    for (int y = 0; y < d.out_h; ++y) {
                        T* dst = dst0 + static_cast<std::size_t>(y + fr) * d.w + fc;
                        const T* srcr = srow + static_cast<std::size_t>(y) * d.out_w;
                        for (int x = 0; x < d.out_w; ++x) dst[x] += srcr[x];
                    }
                }
            }
        }
    }

    void conv_forward(const RfTensor& t, const Params<T>& p, std::size_t s) {
        // Input planes feature-major: input_t_[d][pos].
        const std::size_t npos = static_cast<std::size_t>(arch_.input_w) * arch_.input_h;
        for (std::size_t i = 0; i < npos; ++i) {
            input_t_[i] = static_cast<T>(t.data[2 * i]);
            input_t_[npos + i] = static_cast<T>(t.data[2 * i + 1]);
        }
        const T* cur = input_t_.data();
        for (std::size_t l = 0; l < dims_.size(); ++l) {
            const auto& d = dims_[l];
            T* pt = patches_t_[l][s].data();
            T* at = act_t_[l][s].data();
            im2col_t(cur, d, pt);
            for (int ch = 0; ch < d.c; ++ch) {
                T* row = at + static_cast<std::size_t>(ch) * d.n_win;
                std::fill(row, row + d.n_win, p.conv[l].biases[static_cast<std::size_t>(ch)]);
            }
            const T* filt = p.conv[l].filters.data();
            int ch = 0;
            for (; ch + 4 <= d.c; ch += 4) {
                T* rows[4] = {at + static_cast<std::size_t>(ch) * d.n_win,
                              at + static_cast<std::size_t>(ch + 1) * d.n_win,
                              at + static_cast<std::size_t>(ch + 2) * d.n_win,
                              at + static_cast<std::size_t>(ch + 3) * d.n_win};
                for (std::size_t k = 0; k < d.k; ++k) {
                    const T a[4] = {filt[static_cast<std::size_t>(ch) * d.k + k],
                                    filt[static_cast<std::size_t>(ch + 1) * d.k + k],
                                    filt[static_cast<std::size_t>(ch + 2) * d.k + k],
                                    filt[static_cast<std::size_t>(ch + 3) * d.k + k]};
                    netcore::axpy4(a, pt + k * d.n_win, rows, d.n_win);
                }
            }
            for (; ch < d.c; ++ch) {
                T* row = at + static_cast<std::size_t>(ch) * d.n_win;
                const T* w = filt + static_cast<std::size_t>(ch) * d.k;
                for (std::size_t k = 0; k < d.k; ++k)
                    netcore::axpy(w[k], pt + k * d.n_win, row, d.n_win);
            }
            netcore::relu(at, d.n_win * static_cast<std::size_t>(d.c));
            cur = at;
        }
        // The dense stack consumes the feature-major flatten directly; the
        // exported dense[0] weights are permuted back to the canonical
        // window-major order after training.
        T* x0 = dense_x_[0].data() + s * dense_dims_[0];
        if (arch_.m == 0) {
            for (std::size_t i = 0; i < t.data.size(); ++i) x0[i] = static_cast<T>(t.data[i]);
        } else {
            const auto& last = act_t_.back()[s];
            std::copy(last.begin(), last.end(), x0);
        }
    }

    void conv_backward(const Params<T>& p, Params<T>& grad, std::size_t s, const T* g_flat) {
        // Gradient w.r.t. the last conv layer's post-ReLU output
        // (feature-major, same layout the dense stack consumed).
        const std::size_t flat = dense_dims_[0];
        T* dact = dact_a_.data();
        {
            const auto& a = act_t_.back()[s];
            const T* dx = g_flat + s * flat;
            for (std::size_t i = 0; i < flat; ++i) dact[i] = a[i] > T(0) ? dx[i] : T(0);
        }

        for (int l = arch_.m - 1; l >= 0; --l) {
            const auto& d = dims_[static_cast<std::size_t>(l)];
            auto& gl = grad.conv[static_cast<std::size_t>(l)];
            const auto& pl = p.conv[static_cast<std::size_t>(l)];
            const T* pt = patches_t_[static_cast<std::size_t>(l)][s].data();
            const T* gt = dact;  // already feature-major rows of length n_win
            const bool need_dx = l > 0;

            for (int ch = 0; ch < d.c; ++ch) {
                const T* row = gt + static_cast<std::size_t>(ch) * d.n_win;
                T bias_sum = T(0);
                for (std::size_t win = 0; win < d.n_win; ++win) bias_sum += row[win];
                gl.biases[static_cast<std::size_t>(ch)] += bias_sum;
            }
            {
                int ch = 0;
                for (; ch + 4 <= d.c; ch += 4) {
                    const T* rows[4] = {gt + static_cast<std::size_t>(ch) * d.n_win,
                                        gt + static_cast<std::size_t>(ch + 1) * d.n_win,
                                        gt + static_cast<std::size_t>(ch + 2) * d.n_win,
                                        gt + static_cast<std::size_t>(ch + 3) * d.n_win};
                    for (std::size_t k = 0; k < d.k; ++k) {
                        T out4[4];
                        netcore::dot4(pt + k * d.n_win, rows, d.n_win, out4);
                        for (int j = 0; j < 4; ++j)
                            gl.filters[static_cast<std::size_t>(ch + j) * d.k + k] += out4[j];
                    }
                }
                for (; ch < d.c; ++ch) {
                    const T* row = gt + static_cast<std::size_t>(ch) * d.n_win;
                    T* dw = gl.filters.data() + static_cast<std::size_t>(ch) * d.k;
                    for (std::size_t k = 0; k < d.k; ++k)
                        dw[k] += netcore::dot(row, pt + k * d.n_win, d.n_win);
                }
            }

            if (need_dx) {
                std::fill(dpatches_t_.begin(), dpatches_t_.begin() + d.n_win * d.k, T(0));
                int ch = 0;
                for (; ch + 4 <= d.c; ch += 4) {
                    const T* rows[4] = {gt + static_cast<std::size_t>(ch) * d.n_win,
                                        gt + static_cast<std::size_t>(ch + 1) * d.n_win,
                                        gt + static_cast<std::size_t>(ch + 2) * d.n_win,
                                        gt + static_cast<std::size_t>(ch + 3) * d.n_win};
                    for (std::size_t k = 0; k < d.k; ++k) {
                        const T a[4] = {pl.filters[static_cast<std::size_t>(ch) * d.k + k],
                                        pl.filters[static_cast<std::size_t>(ch + 1) * d.k + k],
                                        pl.filters[static_cast<std::size_t>(ch + 2) * d.k + k],
                                        pl.filters[static_cast<std::size_t>(ch + 3) * d.k + k]};
                        netcore::waxpy4(a, rows, dpatches_t_.data() + k * d.n_win, d.n_win);
                    }
                }
                for (; ch < d.c; ++ch) {
                    const T* row = gt + static_cast<std::size_t>(ch) * d.n_win;
                    const T* w = pl.filters.data() + static_cast<std::size_t>(ch) * d.k;
                    for (std::size_t k = 0; k < d.k; ++k)
                        netcore::axpy(w[k], row, dpatches_t_.data() + k * d.n_win, d.n_win);
                }
                std::fill(dinput_t_.begin(),
                          dinput_t_.begin() + static_cast<std::size_t>(d.w) * d.h * d.din, T(0));
                col2im_t(dpatches_t_.data(), d, dinput_t_.data());
                // Mask through the previous layer's ReLU (feature-major).
                const auto& aprev = act_t_[static_cast<std::size_t>(l) - 1][s];
                T* dprev = (dact == dact_a_.data()) ? dact_b_.data() : dact_a_.data();
                for (std::size_t i = 0; i < aprev.size(); ++i)
                    dprev[i] = aprev[i] > T(0) ? dinput_t_[i] : T(0);
                dact = dprev;
            }
        }
    }

    RfnetArch arch_;
    std::vector<ConvDims> dims_;
    std::size_t max_batch_;
    std::vector<std::vector<std::vector<T>>> patches_t_, act_t_;  // [layer][sample]
    std::vector<T> input_t_, dact_a_, dact_b_, dpatches_t_, dinput_t_;
    std::vector<std::size_t> dense_dims_;  // flat, hidden..., n_classes
    std::vector<std::vector<T>> dense_x_;  // [layer] batch-major activations
    std::vector<T> g_a_, g_b_;
    std::vector<double> probs_;
};

// The trainer feeds the first dense layer a channel-major flatten
// (ch * n_win + win); the published layout is window-major (win * c + ch).
// Rewrites dense[0]'s weight columns accordingly.
template <typename T>
void permute_first_dense_to_canonical(const RfnetArch& arch, Params<T>& p) {
    if (arch.m == 0) return;
    const std::size_t c = static_cast<std::size_t>(arch.conv_filters[arch.m - 1]);
    const std::size_t n_win = arch.flat_size() / c;
    auto& dl = p.dense[0];
    const std::size_t out = dl.biases.size();
    const std::size_t in = arch.flat_size();
    std::vector<T> w(dl.weights.size());
    for (std::size_t o = 0; o < out; ++o) {
        const T* srow = dl.weights.data() + o * in;
        T* drow = w.data() + o * in;
        for (std::size_t ch = 0; ch < c; ++ch)
            for (std::size_t win = 0; win < n_win; ++win)
                drow[win * c + ch] = srow[ch * n_win + win];
    }
    dl.weights = std::move(w);
}

template <typename T>
void add_l2_gradient(const Params<T>& p, Params<T>& grad, double lambda) {
    // d/dw of lambda * sum w^2 = 2 lambda w; biases are not regularized.
    const T c = static_cast<T>(2.0 * lambda);
    for (std::size_t l = 0; l < p.conv.size(); ++l)
        netcore::axpy(c, p.conv[l].filters.data(), grad.conv[l].filters.data(),
                      p.conv[l].filters.size());
    for (std::size_t l = 0; l < p.dense.size(); ++l)
        netcore::axpy(c, p.dense[l].weights.data(), grad.dense[l].weights.data(),
                      p.dense[l].weights.size());
}

template <typename T>
double l2_term(const Params<T>& p) {
    double s = 0.0;
    for (const auto& cl : p.conv)
        for (T v : cl.filters) s += static_cast<double>(v) * static_cast<double>(v);
    for (const auto& dl : p.dense)
        for (T v : dl.weights) s += static_cast<double>(v) * static_cast<double>(v);
    return s;
}

// Adam state mirrors the parameter layout.
template <typename T>
struct AdamState {
    Params<T> m, v;
    std::int64_t step = 0;
};

template <typename T>
void adam_update_array(T* w, const T* g, T* m, T* v, std::size_t n, const TrainConfig& cfg,
                       double bc1, double bc2) {
    const T b1 = static_cast<T>(cfg.beta1), b2 = static_cast<T>(cfg.beta2);
    const T c1 = static_cast<T>(1.0 - cfg.beta1), c2 = static_cast<T>(1.0 - cfg.beta2);
    const T eps = static_cast<T>(cfg.eps);
    // Fold the bias corrections into the step size / epsilon once per batch.
    const T step = static_cast<T>(cfg.learning_rate / bc1);
    const T vscale = static_cast<T>(1.0 / std::sqrt(bc2));
    for (std::size_t i = 0; i < n; ++i) {
        const T gi = g[i];
        const T mi = b1 * m[i] + c1 * gi;
        const T vi = b2 * v[i] + c2 * gi * gi;
        m[i] = mi;
        v[i] = vi;
        w[i] -= step * mi / (std::sqrt(vi) * vscale + eps);
    }
}

template <typename T>
void adam_step(Params<T>& p, const Params<T>& grad, AdamState<T>& st, const TrainConfig& cfg) {
    ++st.step;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.step));
    for (std::size_t l = 0; l < p.conv.size(); ++l) {
        adam_update_array(p.conv[l].filters.data(), grad.conv[l].filters.data(),
                          st.m.conv[l].filters.data(), st.v.conv[l].filters.data(),
                          p.conv[l].filters.size(), cfg, bc1, bc2);
        adam_update_array(p.conv[l].biases.data(), grad.conv[l].biases.data(),
                          st.m.conv[l].biases.data(), st.v.conv[l].biases.data(),
                          p.conv[l].biases.size(), cfg, bc1, bc2);
    }
    for (std::size_t l = 0; l < p.dense.size(); ++l) {
        adam_update_array(p.dense[l].weights.data(), grad.dense[l].weights.data(),
                          st.m.dense[l].weights.data(), st.v.dense[l].weights.data(),
                          p.dense[l].weights.size(), cfg, bc1, bc2);
        adam_update_array(p.dense[l].biases.data(), grad.dense[l].biases.data(),
                          st.m.dense[l].biases.data(), st.v.dense[l].biases.data(),
                          p.dense[l].biases.size(), cfg, bc1, bc2);
    }
}

}  // namespace

FloatParams init_params(const RfnetArch& arch, std::uint64_t seed) {
    arch.validate();
    FloatParams p = zero_params(arch);
    Rng rng(seed);
    for (int l = 0; l < arch.m; ++l) {
        const double fan_in = static_cast<double>(arch.f) * arch.f * arch.conv_in_depth(l);
        const double bound = std::sqrt(6.0 / fan_in);
        for (float& v : p.conv[static_cast<std::size_t>(l)].filters)
            v = static_cast<float>(rng.uniform(-bound, bound));
    }
    std::size_t in_dim = arch.flat_size();
    for (std::size_t j = 0; j < p.dense.size(); ++j) {
        const double bound = std::sqrt(6.0 / static_cast<double>(in_dim));
        for (float& v : p.dense[j].weights) v = static_cast<float>(rng.uniform(-bound, bound));
        in_dim = p.dense[j].biases.size();
    }
    return p;
}

TrainResult train(const std::vector<RfTensor>& inputs, const std::vector<int>& labels,
                  const RfnetArch& arch, const TrainConfig& cfg) {
    arch.validate();
    if (inputs.empty()) throw ParamError("training set is empty");
    if (inputs.size() != labels.size()) throw ShapeError("inputs/labels size mismatch");
    for (int y : labels)
        if (y < 0 || y >= arch.n_classes) throw ParamError("label out of range");
    if (cfg.learning_rate <= 0.0) throw ParamError("learning_rate must be > 0");
    if (cfg.l2_lambda < 0.0) throw ParamError("l2_lambda must be >= 0");
    if (cfg.batch_size < 1) throw ParamError("batch_size must be >= 1");

    const std::size_t bmax = std::min<std::size_t>(cfg.batch_size, inputs.size());
    TrainResult res;
    res.params = init_params(arch, cfg.seed);
    Model<float> model(arch, bmax);
    FloatParams grad = zero_like<float>(arch);
    AdamState<float> adam{zero_like<float>(arch), zero_like<float>(arch), 0};

    Rng shuffle_rng = Rng(cfg.seed).fork(0x5ffful);
    std::vector<std::size_t> order(inputs.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[shuffle_rng.uniform_int(i)]);

        double loss_sum = 0.0;
        std::size_t correct = 0;
        std::size_t done = 0;
        while (done < order.size()) {
            const std::size_t bsz = std::min<std::size_t>(bmax, order.size() - done);
            fill_zero(grad);
            const double batch_ce =
                model.run_batch(inputs, labels, order.data() + done, bsz, res.params, &grad,
                                &correct);
            if (!std::isfinite(batch_ce)) throw TrainingError("loss became non-finite");

            // Mean gradient over the batch plus the L2 term.
            const float inv = 1.0f / static_cast<float>(bsz);
            for (auto& cl : grad.conv) {
                for (float& v : cl.filters) v *= inv;
                for (float& v : cl.biases) v *= inv;
            }
            for (auto& dl : grad.dense) {
                for (float& v : dl.weights) v *= inv;
                for (float& v : dl.biases) v *= inv;
            }
            add_l2_gradient(res.params, grad, cfg.l2_lambda);
            adam_step(res.params, grad, adam, cfg);

            loss_sum += batch_ce;
            done += bsz;
        }
        res.epoch_loss.push_back(loss_sum / static_cast<double>(order.size()) +
                                 cfg.l2_lambda * l2_term(res.params));
        res.epoch_accuracy.push_back(static_cast<double>(correct) /
                                     static_cast<double>(order.size()));
    }
    permute_first_dense_to_canonical(arch, res.params);
    return res;
}

double evaluate_accuracy(const RfnetArch& arch, const FloatParams& params,
                         const std::vector<RfTensor>& inputs, const std::vector<int>& labels) {
    if (inputs.empty()) return 0.0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < inputs.size(); ++i)
        if (forward_float(arch, params, inputs[i]).argmax == labels[i]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(inputs.size());
}

double weight_norm_sq(const FloatParams& params) { return l2_term(params); }

namespace traindetail {

ParamsD to_double(const FloatParams& p) {
    ParamsD d;
    for (const auto& cl : p.conv) {
        ConvLayer<double> o;
        o.filters.assign(cl.filters.begin(), cl.filters.end());
        o.biases.assign(cl.biases.begin(), cl.biases.end());
        d.conv.push_back(std::move(o));
    }
    for (const auto& dl : p.dense) {
        DenseLayer<double> o;
        o.weights.assign(dl.weights.begin(), dl.weights.end());
        o.biases.assign(dl.biases.begin(), dl.biases.end());
        d.dense.push_back(std::move(o));
    }
    return d;
}

FloatParams to_float(const ParamsD& p) {
    FloatParams f;
    for (const auto& cl : p.conv) {
        ConvLayer<float> o;
        o.filters.assign(cl.filters.begin(), cl.filters.end());
        o.biases.assign(cl.biases.begin(), cl.biases.end());
        f.conv.push_back(std::move(o));
    }
    for (const auto& dl : p.dense) {
        DenseLayer<float> o;
        o.weights.assign(dl.weights.begin(), dl.weights.end());
        o.biases.assign(dl.biases.begin(), dl.biases.end());
        f.dense.push_back(std::move(o));
    }
    return f;
}

double loss_only(const RfnetArch& arch, const ParamsD& p, const std::vector<RfTensor>& xs,
                 const std::vector<int>& ys, double l2_lambda) {
    Model<double> model(arch, xs.size());
    std::vector<std::size_t> idx(xs.size());
    std::iota(idx.begin(), idx.end(), 0);
    const double ce = model.run_batch(xs, ys, idx.data(), xs.size(), p, nullptr, nullptr);
    return ce / static_cast<double>(xs.size()) + l2_lambda * l2_term(p);
}

ParamsD gradient(const RfnetArch& arch, const ParamsD& p, const std::vector<RfTensor>& xs,
                 const std::vector<int>& ys, double l2_lambda) {
    Model<double> model(arch, xs.size());
    ParamsD grad = zero_like<double>(arch);
    std::vector<std::size_t> idx(xs.size());
    std::iota(idx.begin(), idx.end(), 0);
    model.run_batch(xs, ys, idx.data(), xs.size(), p, &grad, nullptr);
    const double inv = 1.0 / static_cast<double>(xs.size());
    for (auto& cl : grad.conv) {
        for (double& v : cl.filters) v *= inv;
        for (double& v : cl.biases) v *= inv;
    }
    for (auto& dl : grad.dense) {
        for (double& v : dl.weights) v *= inv;
        for (double& v : dl.biases) v *= inv;
    }
    add_l2_gradient(p, grad, l2_lambda);
    return grad;
}

}  // namespace traindetail

}  // namespace polyrx
