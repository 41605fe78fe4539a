#include "dtc/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dtc/optim.hpp"
#include "dtc/rng.hpp"

namespace dtc::heatmap {

namespace {
constexpr double kConvInitStdDev = 0.05;
}

void LocalizerConfig::validate() const {
    if (n_filters == 0) throw std::invalid_argument("localizer: n_filters must be >= 1");
    if (kernel_size == 0) throw std::invalid_argument("localizer: kernel_size must be >= 1");
    if (pool_size == 0) throw std::invalid_argument("localizer: pool_size must be >= 1");
    if (n_classes < 2) throw std::invalid_argument("localizer: need at least 2 classes");
    if (max_epochs == 0 || batch_size == 0) {
        throw std::invalid_argument("localizer: epochs and batch_size must be >= 1");
    }
    if (target_accuracy <= 0.0 || target_accuracy > 1.0) {
        throw std::invalid_argument("localizer: target_accuracy must be in (0, 1]");
    }
}

std::vector<Parameter*> LocalizerModel::parameters() {
    return {&conv1_kernels, &conv1_bias, &conv2_kernels, &conv2_bias, &head_weights, &head_bias};
}

std::size_t LocalizerModel::feature_length() const {
    const std::size_t p = config.pool_size;
    const std::size_t l1 = (input_length + p - 1) / p;
    return (l1 + p - 1) / p;
}

LocalizerModel init_localizer(const LocalizerConfig& config, std::size_t input_length,
                              std::uint64_t seed) {
    config.validate();
    if (input_length < config.kernel_size) {
        throw std::invalid_argument("localizer: input shorter than the kernel");
    }

    Rng rng(seed);
    LocalizerModel model;
    model.config = config;
    model.input_length = input_length;
    if (model.feature_length() < 2) {
        throw std::invalid_argument("localizer: pooling leaves fewer than 2 time steps");
    }

    const std::size_t f = config.n_filters;
    model.conv1_kernels = Parameter(Tensor({config.kernel_size, std::size_t{1}, f}));
    model.conv1_bias = Parameter(Tensor({f}));
    model.conv2_kernels = Parameter(Tensor({config.kernel_size, f, f}));
    model.conv2_bias = Parameter(Tensor({f}));
    model.head_weights = Parameter(Tensor({config.n_classes, f}));
    model.head_bias = Parameter(Tensor({config.n_classes}));
    for (double& w : model.conv1_kernels.value.span()) w = rng.gaussian(0.0, kConvInitStdDev);
    for (double& w : model.conv2_kernels.value.span()) w = rng.gaussian(0.0, kConvInitStdDev);
    return model;
}

namespace {

Tensor sequence_tensor(std::span<const double> seq) {
    Tensor x({seq.size(), 1});
    std::copy(seq.begin(), seq.end(), x.data());
    return x;
}

void check_input(const LocalizerModel& model, std::span<const double> x) {
    if (x.size() != model.input_length) {
        throw std::invalid_argument("localizer: input length " + std::to_string(x.size()) +
                                    " does not match configured " +
                                    std::to_string(model.input_length));
    }
}

// Backward through the head and both conv blocks given d(logits).
void localizer_backward(LocalizerModel& model, const LocalizerTrace& trace,
                        std::span<const double> dlogits) {
    const std::size_t f = model.config.n_filters;
    const std::size_t classes = model.config.n_classes;
    const std::size_t lt = trace.features.dim(0);

    std::vector<double> dpooled(f, 0.0);
    for (std::size_t c = 0; c < classes; ++c) {
        model.head_bias.grad[c] += dlogits[c];
        for (std::size_t j = 0; j < f; ++j) {
            model.head_weights.grad.at(c, j) += dlogits[c] * trace.pooled[j];
            dpooled[j] += dlogits[c] * model.head_weights.value.at(c, j);
        }
    }

    Tensor dfeatures({lt, f});
    const double inv_lt = 1.0 / static_cast<double>(lt);
    for (std::size_t t = 0; t < lt; ++t) {
        for (std::size_t j = 0; j < f; ++j) dfeatures.at(t, j) = dpooled[j] * inv_lt;
    }

    Tensor g = maxpool1d_backward(trace.pool2, dfeatures);
    g = leaky_relu_backward(trace.relu2, g);
    g = conv1d_backward(trace.conv2, g, model.conv2_kernels, model.conv2_bias);
    g = maxpool1d_backward(trace.pool1, g);
    g = leaky_relu_backward(trace.relu1, g);
    conv1d_backward(trace.conv1, g, model.conv1_kernels, model.conv1_bias);
}

// Interpolates a per-feature-step map back to input resolution. Feature
// step t covers a stride of pool^2 inputs centred at t*stride + (stride-1)/2.
std::vector<double> interpolate_to_input(std::span<const double> coarse, std::size_t stride,
                                         std::size_t out_length) {
    std::vector<double> fine(out_length, 0.0);
    const double offset = (static_cast<double>(stride) - 1.0) / 2.0;
    const double last = static_cast<double>(coarse.size() - 1);
    for (std::size_t u = 0; u < out_length; ++u) {
        double pos = (static_cast<double>(u) - offset) / static_cast<double>(stride);
        pos = std::clamp(pos, 0.0, last);
        const auto lower = static_cast<std::size_t>(pos);
        const std::size_t upper = std::min(lower + 1, coarse.size() - 1);
        const double frac = pos - static_cast<double>(lower);
        fine[u] = (1.0 - frac) * coarse[lower] + frac * coarse[upper];
    }
    return fine;
}

}  // namespace

std::vector<double> localizer_logits(const LocalizerModel& model, std::span<const double> x,
                                     LocalizerTrace* trace) {
    check_input(model, x);
    LocalizerTrace local;
    LocalizerTrace& tr = trace ? *trace : local;

    Tensor h = conv1d_forward(sequence_tensor(x), model.conv1_kernels, model.conv1_bias,
                              &tr.conv1);
    h = leaky_relu_forward(h, model.config.leaky_slope, &tr.relu1);
    h = maxpool1d_forward(h, model.config.pool_size, &tr.pool1);
    h = conv1d_forward(h, model.conv2_kernels, model.conv2_bias, &tr.conv2);
    h = leaky_relu_forward(h, model.config.leaky_slope, &tr.relu2);
    tr.features = maxpool1d_forward(h, model.config.pool_size, &tr.pool2);

    const std::size_t f = model.config.n_filters;
    const std::size_t lt = tr.features.dim(0);
    tr.pooled.assign(f, 0.0);
    for (std::size_t t = 0; t < lt; ++t) {
        for (std::size_t j = 0; j < f; ++j) tr.pooled[j] += tr.features.at(t, j);
    }
    for (double& v : tr.pooled) v /= static_cast<double>(lt);

    std::vector<double> logits(model.config.n_classes, 0.0);
    for (std::size_t c = 0; c < model.config.n_classes; ++c) {
        double acc = model.head_bias.value[c];
        for (std::size_t j = 0; j < f; ++j) {
            acc += model.head_weights.value.at(c, j) * tr.pooled[j];
        }
        logits[c] = acc;
    }
    return logits;
}

int localizer_predict(const LocalizerModel& model, std::span<const double> x) {
    const std::vector<double> logits = localizer_logits(model, x);
    std::size_t best = 0;
    for (std::size_t c = 1; c < logits.size(); ++c) {
        if (logits[c] > logits[best]) best = c;
    }
    return static_cast<int>(best);
}

LocalizerModel train_localizer(const dataio::Dataset& data, std::span<const int> labels,
                               const LocalizerConfig& config, std::uint64_t seed,
                               LocalizerTrainInfo* info) {
    if (labels.size() != data.n || data.n == 0) {
        throw std::invalid_argument("train_localizer: labels must match the dataset");
    }
    bool multiclass = false;
    for (int label : labels) {
        if (label < 0 || static_cast<std::size_t>(label) >= config.n_classes) {
            throw std::invalid_argument("train_localizer: label out of range");
        }
        multiclass = multiclass || (label != labels[0]);
    }
    if (!multiclass) {
        throw std::invalid_argument("train_localizer: all samples carry the same label");
    }

    Rng rng(seed);
    LocalizerModel model = init_localizer(config, data.length, rng.next_seed());
    Adam optimizer(config.learning_rate);
    const std::vector<Parameter*> params = model.parameters();

    std::vector<std::size_t> order(data.n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    LocalizerTrainInfo local_info;
    LocalizerTrainInfo& out = info ? *info : local_info;
    for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < data.n; start += config.batch_size) {
            const std::size_t end = std::min(data.n, start + config.batch_size);
            const double inv_batch = 1.0 / static_cast<double>(end - start);
            zero_grads(params);
            for (std::size_t b = start; b < end; ++b) {
                const std::size_t idx = order[b];
                LocalizerTrace trace;
                const std::vector<double> logits =
                    localizer_logits(model, data.sequence(idx), &trace);

                const double peak = *std::max_element(logits.begin(), logits.end());
                double norm = 0.0;
                std::vector<double> probs(logits.size());
                for (std::size_t c = 0; c < logits.size(); ++c) {
                    probs[c] = std::exp(logits[c] - peak);
                    norm += probs[c];
                }
                for (double& p : probs) p /= norm;

                const auto target = static_cast<std::size_t>(labels[idx]);
                epoch_loss += -std::log(std::max(probs[target], 1e-300));

                std::vector<double> dlogits(probs);
                dlogits[target] -= 1.0;
                for (double& g : dlogits) g *= inv_batch;
                localizer_backward(model, trace, dlogits);
            }
            optimizer.step(params);
        }

        std::size_t correct = 0;
        for (std::size_t i = 0; i < data.n; ++i) {
            correct += (localizer_predict(model, data.sequence(i)) == labels[i]);
        }
        const double accuracy = static_cast<double>(correct) / static_cast<double>(data.n);
        out.epoch_loss.push_back(epoch_loss / static_cast<double>(data.n));
        out.epoch_accuracy.push_back(accuracy);
        out.epochs_run = epoch + 1;
        out.final_accuracy = accuracy;
        if (accuracy >= config.target_accuracy) break;
    }
    return model;
}

std::vector<double> class_activation_map(const LocalizerModel& model, std::span<const double> x,
                                         std::size_t target_class) {
    check_input(model, x);
    if (target_class >= model.config.n_classes) {
        throw std::invalid_argument("class_activation_map: class out of range");
    }

    LocalizerTrace trace;
    localizer_logits(model, x, &trace);
    const std::size_t lt = trace.features.dim(0);
    std::vector<double> coarse(lt, 0.0);
    for (std::size_t t = 0; t < lt; ++t) {
        double acc = 0.0;
        for (std::size_t j = 0; j < model.config.n_filters; ++j) {
            acc += model.head_weights.value.at(target_class, j) * trace.features.at(t, j);
        }
        coarse[t] = acc;
    }
    return interpolate_to_input(coarse, model.config.pool_size * model.config.pool_size,
                                model.input_length);
}

std::vector<double> generate_heatmap(const LocalizerModel& model, std::span<const double> x,
                                     std::size_t target_class) {
    std::vector<double> map = class_activation_map(model, x, target_class);
    const auto [lo, hi] = std::minmax_element(map.begin(), map.end());
    const double low = *lo;
    const double range = *hi - low;
    if (range < 1e-12) return std::vector<double>(map.size(), 0.0);
    for (double& v : map) v = (v - low) / range;
    return map;
}

}  // namespace dtc::heatmap
