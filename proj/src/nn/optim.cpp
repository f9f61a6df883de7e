#include "hesplit/nn/optim.hpp"

#include <cmath>

namespace hesplit::nn {

void Adam::step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads,
                float learning_rate) {
    if (params.size() != grads.size()) {
        throw ShapeError("Adam::step: parameter and gradient lists differ in length");
    }
    if (m_.empty()) {
        for (const Tensor* p : params) {
            m_.emplace_back(p->shape());
            v_.emplace_back(p->shape());
        }
    }
    if (m_.size() != params.size()) {
        throw ShapeError("Adam::step: parameter list changed between steps");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i]->shape() != grads[i]->shape() || params[i]->shape() != m_[i].shape()) {
            throw ShapeError("Adam::step: shape mismatch for parameter " + std::to_string(i) + ": " +
                             to_string(params[i]->shape()) + " vs grad " +
                             to_string(grads[i]->shape()));
        }
    }

    ++t_;
    const float b1 = config_.beta1, b2 = config_.beta2;
    const float bias1 = 1.0f - std::pow(b1, static_cast<float>(t_));
    const float bias2_sqrt = std::sqrt(1.0f - std::pow(b2, static_cast<float>(t_)));
    const float step_size = learning_rate / bias1;

    for (std::size_t i = 0; i < params.size(); ++i) {
        auto p = params[i]->data();
        auto g = grads[i]->data();
        auto m = m_[i].data();
        auto v = v_[i].data();
        for (std::size_t j = 0; j < p.size(); ++j) {
            m[j] = b1 * m[j] + (1.0f - b1) * g[j];
            v[j] = b2 * v[j] + (1.0f - b2) * g[j] * g[j];
            const float denom = std::sqrt(v[j]) / bias2_sqrt + config_.epsilon;
            p[j] -= step_size * m[j] / denom;
        }
    }
}

void sgd_step(Tensor& param, const Tensor& grad, float learning_rate) {
    if (param.shape() != grad.shape()) {
        throw ShapeError("sgd_step: shape mismatch " + to_string(param.shape()) + " vs " +
                         to_string(grad.shape()));
    }
    auto p = param.data();
    auto g = grad.data();
    for (std::size_t j = 0; j < p.size(); ++j) {
        p[j] -= learning_rate * g[j];
    }
}

}  // namespace hesplit::nn
