#pragma once

#include <cstdint>
#include <vector>

#include "hesplit/tensor.hpp"

namespace hesplit::nn {

struct AdamConfig {
    float beta1 = 0.9f;
    float beta2 = 0.999f;
    float epsilon = 1e-8f;
};

/// Adam with bias correction. Moments are created lazily on the first step
/// and keep the shapes of the parameters they track.
class Adam {
public:
    explicit Adam(AdamConfig config = {}) : config_(config) {}

    /// One step over all parameter/gradient pairs; t advances once per call.
    void step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads,
              float learning_rate);

    std::uint64_t steps() const noexcept { return t_; }
    const std::vector<Tensor>& first_moments() const noexcept { return m_; }
    const std::vector<Tensor>& second_moments() const noexcept { return v_; }

private:
    AdamConfig config_;
    std::uint64_t t_ = 0;
    std::vector<Tensor> m_;
    std::vector<Tensor> v_;
};

/// Plain gradient descent: p -= lr * g.
void sgd_step(Tensor& param, const Tensor& grad, float learning_rate);

}  // namespace hesplit::nn
