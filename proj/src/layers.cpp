#include "dtc/layers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dtc/kernels.hpp"

namespace dtc {

namespace {

void check_2d(const Tensor& x, const char* where) {
    if (x.ndim() != 2) {
        throw std::invalid_argument(std::string(where) + ": expected a 2-D [T x C] tensor, got " +
                                    x.shape_string());
    }
}

void check_conv_shapes(const Tensor& x, const Parameter& kernels, const Parameter& bias,
                       const char* where) {
    check_2d(x, where);
    if (kernels.value.ndim() != 3) {
        throw std::invalid_argument(std::string(where) + ": kernels must be [K x Cin x F], got " +
                                    kernels.value.shape_string());
    }
    const std::size_t K = kernels.value.dim(0);
    const std::size_t Cin = kernels.value.dim(1);
    const std::size_t F = kernels.value.dim(2);
    if (x.cols() != Cin) {
        throw std::invalid_argument(std::string(where) + ": input channels " +
                                    std::to_string(x.cols()) + " do not match kernel Cin " +
                                    std::to_string(Cin));
    }
    if (bias.value.size() != F) {
        throw std::invalid_argument(std::string(where) + ": bias length " +
                                    std::to_string(bias.value.size()) + " does not match F " +
                                    std::to_string(F));
    }
    if (K > x.rows()) {
        throw std::invalid_argument(std::string(where) + ": kernel size " + std::to_string(K) +
                                    " exceeds sequence length " + std::to_string(x.rows()));
    }
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

// ---------------------------------------------------------------------------
// conv1d

Tensor conv1d_forward(const Tensor& x, const Parameter& kernels, const Parameter& bias,
                      Conv1dContext* ctx) {
    check_conv_shapes(x, kernels, bias, "conv1d");
    const std::size_t L = x.rows();
    const std::size_t Cin = kernels.value.dim(1);
    const std::size_t K = kernels.value.dim(0);
    const std::size_t F = kernels.value.dim(2);
    Tensor y({L, F});
    kernels::conv1d_forward(x.data(), L, Cin, kernels.value.data(), K, F, bias.value.data(),
                            y.data());
    if (ctx) ctx->input = x;
    return y;
}

Tensor conv1d_backward(const Conv1dContext& ctx, const Tensor& grad_out, Parameter& kernels,
                       Parameter& bias) {
    const Tensor& x = ctx.input;
    const std::size_t L = x.rows();
    const std::size_t Cin = kernels.value.dim(1);
    const std::size_t K = kernels.value.dim(0);
    const std::size_t F = kernels.value.dim(2);
    if (grad_out.rows() != L || grad_out.cols() != F) {
        throw std::invalid_argument("conv1d backward: grad shape " + grad_out.shape_string() +
                                    " does not match output");
    }
    Tensor dx({L, Cin});
    kernels::conv1d_backward(x.data(), L, Cin, kernels.value.data(), K, F, grad_out.data(),
                             dx.data(), kernels.grad.data(), bias.grad.data());
    return dx;
}

// ---------------------------------------------------------------------------
// deconv1d

Tensor deconv1d_forward(const Tensor& x, const Parameter& kernels, const Parameter& bias,
                        std::size_t out_length, Deconv1dContext* ctx) {
    check_2d(x, "deconv1d");
    if (kernels.value.ndim() != 3 || kernels.value.dim(1) != x.cols()) {
        throw std::invalid_argument("deconv1d: kernels must be [K x Cin x F] with Cin matching "
                                    "input, got " + kernels.value.shape_string());
    }
    if (out_length == 0) throw std::invalid_argument("deconv1d: out_length must be positive");
    const std::size_t T = x.rows();
    const std::size_t Cin = kernels.value.dim(1);
    const std::size_t K = kernels.value.dim(0);
    const std::size_t F = kernels.value.dim(2);
    Tensor y({out_length, F});
    kernels::deconv1d_forward(x.data(), T, Cin, kernels.value.data(), K, F, bias.value.data(),
                              y.data(), out_length);
    if (ctx) {
        ctx->input = x;
        ctx->out_length = out_length;
    }
    return y;
}

Tensor deconv1d_backward(const Deconv1dContext& ctx, const Tensor& grad_out, Parameter& kernels,
                         Parameter& bias) {
    const Tensor& x = ctx.input;
    const std::size_t T = x.rows();
    const std::size_t Cin = kernels.value.dim(1);
    const std::size_t K = kernels.value.dim(0);
    const std::size_t F = kernels.value.dim(2);
    if (grad_out.rows() != ctx.out_length || grad_out.cols() != F) {
        throw std::invalid_argument("deconv1d backward: grad shape " + grad_out.shape_string() +
                                    " does not match output");
    }
    Tensor dx({T, Cin});
    kernels::deconv1d_backward(x.data(), T, Cin, kernels.value.data(), K, F, grad_out.data(),
                               ctx.out_length, dx.data(), kernels.grad.data(), bias.grad.data());
    return dx;
}

// ---------------------------------------------------------------------------
// leaky ReLU

Tensor leaky_relu_forward(const Tensor& x, double slope, LeakyReluContext* ctx) {
    Tensor y = x;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] < 0.0) y[i] *= slope;
    }
    if (ctx) {
        ctx->input = x;
        ctx->slope = slope;
    }
    return y;
}

Tensor leaky_relu_backward(const LeakyReluContext& ctx, const Tensor& grad_out) {
    check_same_shape(ctx.input, grad_out, "leaky_relu backward");
    Tensor dx = grad_out;
    for (std::size_t i = 0; i < dx.size(); ++i) {
        if (ctx.input[i] < 0.0) dx[i] *= ctx.slope;
    }
    return dx;
}

// ---------------------------------------------------------------------------
// maxpool1d

Tensor maxpool1d_forward(const Tensor& x, std::size_t pool, MaxPool1dContext* ctx) {
    check_2d(x, "maxpool1d");
    if (pool == 0) throw std::invalid_argument("maxpool1d: pool size must be >= 1");
    const std::size_t L = x.rows();
    const std::size_t F = x.cols();
    const std::size_t Tout = (L + pool - 1) / pool;
    Tensor y({Tout, F});
    std::vector<std::size_t> argmax(Tout * F);
    for (std::size_t win = 0; win < Tout; ++win) {
        const std::size_t start = win * pool;
        const std::size_t end = std::min(start + pool, L);
        for (std::size_t f = 0; f < F; ++f) {
            std::size_t best = start;
            double best_val = x.at(start, f);
            for (std::size_t t = start + 1; t < end; ++t) {
                if (x.at(t, f) > best_val) {
                    best_val = x.at(t, f);
                    best = t;
                }
            }
            y.at(win, f) = best_val;
            argmax[win * F + f] = best;
        }
    }
    if (ctx) {
        ctx->in_length = L;
        ctx->channels = F;
        ctx->argmax = std::move(argmax);
    }
    return y;
}

Tensor maxpool1d_backward(const MaxPool1dContext& ctx, const Tensor& grad_out) {
    const std::size_t F = ctx.channels;
    if (grad_out.size() != ctx.argmax.size() || grad_out.cols() != F) {
        throw std::invalid_argument("maxpool1d backward: grad shape " + grad_out.shape_string() +
                                    " does not match pooled output");
    }
    Tensor dx({ctx.in_length, F});
    for (std::size_t win = 0; win < grad_out.rows(); ++win) {
        for (std::size_t f = 0; f < F; ++f) {
            dx.at(ctx.argmax[win * F + f], f) += grad_out.at(win, f);
        }
    }
    return dx;
}

// ---------------------------------------------------------------------------
// upsample1d

Tensor upsample1d_forward(const Tensor& x, std::size_t factor, Upsample1dContext* ctx) {
    check_2d(x, "upsample1d");
    if (factor == 0) throw std::invalid_argument("upsample1d: factor must be >= 1");
    const std::size_t T = x.rows();
    const std::size_t F = x.cols();
    Tensor y({T * factor, F});
    for (std::size_t t = 0; t < T * factor; ++t) {
        const std::size_t src = t / factor;
        for (std::size_t f = 0; f < F; ++f) y.at(t, f) = x.at(src, f);
    }
    if (ctx) {
        ctx->in_length = T;
        ctx->channels = F;
        ctx->factor = factor;
    }
    return y;
}

Tensor upsample1d_backward(const Upsample1dContext& ctx, const Tensor& grad_out) {
    if (grad_out.rows() != ctx.in_length * ctx.factor || grad_out.cols() != ctx.channels) {
        throw std::invalid_argument("upsample1d backward: grad shape " + grad_out.shape_string() +
                                    " does not match output");
    }
    Tensor dx({ctx.in_length, ctx.channels});
    for (std::size_t t = 0; t < grad_out.rows(); ++t) {
        const std::size_t src = t / ctx.factor;
        for (std::size_t f = 0; f < ctx.channels; ++f) dx.at(src, f) += grad_out.at(t, f);
    }
    return dx;
}

// ---------------------------------------------------------------------------
// BiLSTM

BiLstmParams::BiLstmParams(std::size_t input, std::size_t hidden)
    : input_size(input), hidden_size(hidden) {
    for (LstmDirParams* dir : {&fwd, &bwd}) {
        dir->w_in = Parameter(Tensor({input, 4 * hidden}));
        dir->w_rec = Parameter(Tensor({hidden, 4 * hidden}));
        dir->bias = Parameter(Tensor({4 * hidden}));
    }
}

void BiLstmParams::init_gaussian(Rng& rng, double stddev) {
    for (LstmDirParams* dir : {&fwd, &bwd}) {
        for (std::size_t i = 0; i < dir->w_in.size(); ++i) {
            dir->w_in.value[i] = rng.gaussian(0.0, stddev);
        }
        for (std::size_t i = 0; i < dir->w_rec.size(); ++i) {
            dir->w_rec.value[i] = rng.gaussian(0.0, stddev);
        }
        dir->bias.value.fill(0.0);
    }
}

std::vector<Parameter*> BiLstmParams::parameters() {
    return {&fwd.w_in, &fwd.w_rec, &fwd.bias, &bwd.w_in, &bwd.w_rec, &bwd.bias};
}

namespace {

Tensor reverse_time(const Tensor& x) {
    const std::size_t T = x.rows();
    const std::size_t F = x.cols();
    Tensor r({T, F});
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t f = 0; f < F; ++f) r.at(t, f) = x.at(T - 1 - t, f);
    }
    return r;
}

// One direction of the LSTM on x in its own time order.
Tensor lstm_dir_forward(const Tensor& x, const LstmDirParams& p, std::size_t H,
                        LstmDirContext* ctx) {
    const std::size_t T = x.rows();
    const std::size_t F = x.cols();
    Tensor gates({T, 4 * H});
    Tensor cell({T, H});
    Tensor cell_tanh({T, H});
    Tensor hidden({T, H});
    std::vector<double> act(4 * H);
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t j = 0; j < 4 * H; ++j) act[j] = p.bias.value[j];
        const double* xt = x.data() + t * F;
        for (std::size_t i = 0; i < F; ++i) {
            const double xi = xt[i];
            const double* wrow = p.w_in.value.data() + i * 4 * H;
            for (std::size_t j = 0; j < 4 * H; ++j) act[j] += xi * wrow[j];
        }
        if (t > 0) {
            const double* hprev = hidden.data() + (t - 1) * H;
            for (std::size_t i = 0; i < H; ++i) {
                const double hi = hprev[i];
                const double* urow = p.w_rec.value.data() + i * 4 * H;
                for (std::size_t j = 0; j < 4 * H; ++j) act[j] += hi * urow[j];
            }
        }
        for (std::size_t h = 0; h < H; ++h) {
            const double gi = sigmoid(act[h]);
            const double gf = sigmoid(act[H + h]);
            const double gg = std::tanh(act[2 * H + h]);
            const double go = sigmoid(act[3 * H + h]);
            const double c_prev = t > 0 ? cell.at(t - 1, h) : 0.0;
            const double c = gf * c_prev + gi * gg;
            const double tc = std::tanh(c);
            gates.at(t, h) = gi;
            gates.at(t, H + h) = gf;
            gates.at(t, 2 * H + h) = gg;
            gates.at(t, 3 * H + h) = go;
            cell.at(t, h) = c;
            cell_tanh.at(t, h) = tc;
            hidden.at(t, h) = go * tc;
        }
    }
    if (ctx) {
        ctx->input = x;
        ctx->gates = std::move(gates);
        ctx->cell = std::move(cell);
        ctx->cell_tanh = std::move(cell_tanh);
        ctx->hidden = hidden;
    }
    return hidden;
}

// Backpropagation through time for one direction; grad_h is the gradient
// w.r.t. this direction's hidden outputs in its own time order.
Tensor lstm_dir_backward(const LstmDirContext& ctx, const Tensor& grad_h, LstmDirParams& p,
                         std::size_t H) {
    const Tensor& x = ctx.input;
    const std::size_t T = x.rows();
    const std::size_t F = x.cols();
    Tensor dx({T, F});
    std::vector<double> dh_rec(H, 0.0);
    std::vector<double> dc_next(H, 0.0);
    std::vector<double> da(4 * H);
    for (std::size_t ti = T; ti-- > 0;) {
        for (std::size_t h = 0; h < H; ++h) {
            const double gi = ctx.gates.at(ti, h);
            const double gf = ctx.gates.at(ti, H + h);
            const double gg = ctx.gates.at(ti, 2 * H + h);
            const double go = ctx.gates.at(ti, 3 * H + h);
            const double tc = ctx.cell_tanh.at(ti, h);
            const double c_prev = ti > 0 ? ctx.cell.at(ti - 1, h) : 0.0;
            const double dh = grad_h.at(ti, h) + dh_rec[h];
            const double dgo = dh * tc;
            const double dc = dh * go * (1.0 - tc * tc) + dc_next[h];
            const double dgi = dc * gg;
            const double dgg = dc * gi;
            const double dgf = dc * c_prev;
            dc_next[h] = dc * gf;
            da[h] = dgi * gi * (1.0 - gi);
            da[H + h] = dgf * gf * (1.0 - gf);
            da[2 * H + h] = dgg * (1.0 - gg * gg);
            da[3 * H + h] = dgo * go * (1.0 - go);
        }
        const double* xt = x.data() + ti * F;
        for (std::size_t i = 0; i < F; ++i) {
            const double xi = xt[i];
            double* dwrow = p.w_in.grad.data() + i * 4 * H;
            const double* wrow = p.w_in.value.data() + i * 4 * H;
            double acc = 0.0;
            for (std::size_t j = 0; j < 4 * H; ++j) {
                dwrow[j] += xi * da[j];
                acc += wrow[j] * da[j];
            }
            dx.at(ti, i) = acc;
        }
        for (std::size_t j = 0; j < 4 * H; ++j) p.bias.grad[j] += da[j];
        std::fill(dh_rec.begin(), dh_rec.end(), 0.0);
        if (ti > 0) {
            const double* hprev = ctx.hidden.data() + (ti - 1) * H;
            for (std::size_t i = 0; i < H; ++i) {
                const double hi = hprev[i];
                double* durow = p.w_rec.grad.data() + i * 4 * H;
                const double* urow = p.w_rec.value.data() + i * 4 * H;
                double acc = 0.0;
                for (std::size_t j = 0; j < 4 * H; ++j) {
                    durow[j] += hi * da[j];
                    acc += urow[j] * da[j];
                }
                dh_rec[i] = acc;
            }
        }
    }
    return dx;
}

}  // namespace

Tensor bilstm_forward(const Tensor& x, const BiLstmParams& params, BiLstmContext* ctx) {
    check_2d(x, "bilstm");
    if (x.cols() != params.input_size) {
        throw std::invalid_argument("bilstm: input width " + std::to_string(x.cols()) +
                                    " does not match configured size " +
                                    std::to_string(params.input_size));
    }
    const std::size_t T = x.rows();
    const std::size_t H = params.hidden_size;
    BiLstmContext local;
    BiLstmContext* c = ctx ? ctx : &local;
    Tensor hf = lstm_dir_forward(x, params.fwd, H, &c->fwd);
    Tensor hb = lstm_dir_forward(reverse_time(x), params.bwd, H, &c->bwd);
    Tensor y({T, H});
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t h = 0; h < H; ++h) {
            y.at(t, h) = 0.5 * (hf.at(t, h) + hb.at(T - 1 - t, h));
        }
    }
    return y;
}

Tensor bilstm_backward(const BiLstmContext& ctx, const Tensor& grad_out, BiLstmParams& params) {
    const std::size_t T = ctx.fwd.input.rows();
    const std::size_t H = params.hidden_size;
    if (grad_out.rows() != T || grad_out.cols() != H) {
        throw std::invalid_argument("bilstm backward: grad shape " + grad_out.shape_string() +
                                    " does not match output");
    }
    Tensor ghf({T, H});
    Tensor ghb({T, H});
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t h = 0; h < H; ++h) {
            ghf.at(t, h) = 0.5 * grad_out.at(t, h);
            ghb.at(T - 1 - t, h) = 0.5 * grad_out.at(t, h);
        }
    }
    Tensor dxf = lstm_dir_backward(ctx.fwd, ghf, params.fwd, H);
    Tensor dxb = lstm_dir_backward(ctx.bwd, ghb, params.bwd, H);
    Tensor dx = dxf;
    const std::size_t F = dx.cols();
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t f = 0; f < F; ++f) dx.at(t, f) += dxb.at(T - 1 - t, f);
    }
    return dx;
}

}  // namespace dtc
