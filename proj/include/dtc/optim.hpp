#pragma once

#include <span>
#include <vector>

#include "dtc/tensor.hpp"

namespace dtc {

// Plain SGD: value <- value - lr * grad. Gradients are left untouched;
// callers zero them between steps.
void sgd_step(std::span<Parameter* const> params, double learning_rate);

// Adam with bias-corrected moments. The optimizer binds to a parameter list
// on the first step and keeps per-entry first/second moment state.
class Adam {
public:
    explicit Adam(double learning_rate = 1e-3, double beta1 = 0.9, double beta2 = 0.999,
                  double epsilon = 1e-8)
        : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {}

    void step(std::span<Parameter* const> params);

    double learning_rate() const { return lr_; }
    void set_learning_rate(double lr) { lr_ = lr; }

private:
    double lr_, beta1_, beta2_, eps_;
    std::size_t t_ = 0;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
};

inline void zero_grads(std::span<Parameter* const> params) {
    for (Parameter* p : params) p->zero_grad();
}

}  // namespace dtc
