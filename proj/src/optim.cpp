#include "dtc/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace dtc {

void sgd_step(std::span<Parameter* const> params, double learning_rate) {
    for (Parameter* p : params) {
        for (std::size_t i = 0; i < p->size(); ++i) {
            p->value[i] -= learning_rate * p->grad[i];
        }
    }
}

void Adam::step(std::span<Parameter* const> params) {
    if (m_.empty()) {
        for (const Parameter* p : params) {
            m_.emplace_back(p->size(), 0.0);
            v_.emplace_back(p->size(), 0.0);
        }
    }
    if (m_.size() != params.size()) {
        throw std::invalid_argument("Adam: parameter list changed between steps");
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Parameter* p = params[pi];
        if (p->size() != m_[pi].size()) {
            throw std::invalid_argument("Adam: parameter size changed between steps");
        }
        for (std::size_t i = 0; i < p->size(); ++i) {
            const double g = p->grad[i];
            m_[pi][i] = beta1_ * m_[pi][i] + (1.0 - beta1_) * g;
            v_[pi][i] = beta2_ * v_[pi][i] + (1.0 - beta2_) * g * g;
            const double mhat = m_[pi][i] / bc1;
            const double vhat = v_[pi][i] / bc2;
            p->value[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

}  // namespace dtc
