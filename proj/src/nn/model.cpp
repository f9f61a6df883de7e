#include "hesplit/nn/model.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace hesplit::nn {

std::size_t Architecture::split_width() const { return conv2_channels * (timesteps / 4); }

std::size_t Architecture::parameter_count() const {
    const std::size_t conv1 = conv1_channels * input_channels * conv1_kernel + conv1_channels;
    const std::size_t conv2 = conv2_channels * conv1_channels * conv2_kernel + conv2_channels;
    const std::size_t head = split_width() * classes + classes;
    return conv1 + conv2 + head;
}

void Architecture::validate() const {
    if (input_channels == 0 || conv1_channels == 0 || conv2_channels == 0 || classes == 0) {
        throw ShapeError("Architecture: channel counts must be positive");
    }
    if (conv1_kernel % 2 == 0 || conv2_kernel % 2 == 0) {
        throw ShapeError("Architecture: kernels must be odd for same padding");
    }
    if (timesteps == 0 || timesteps % 4 != 0) {
        throw ShapeError("Architecture: timesteps must be a positive multiple of 4");
    }
    if (!(leaky_slope > 0.0f && leaky_slope < 1.0f)) {
        throw std::invalid_argument("Architecture: leaky slope must be in (0,1)");
    }
}

std::vector<const Tensor*> ClientGrads::list() const {
    return {&conv1.weight, &conv1.bias, &conv2.weight, &conv2.bias};
}

ClientModel::ClientModel(const Architecture& arch)
    : conv1(Conv1d::same(arch.input_channels, arch.conv1_channels, arch.conv1_kernel)),
      conv2(Conv1d::same(arch.conv1_channels, arch.conv2_channels, arch.conv2_kernel)),
      arch_(arch) {
    arch_.validate();
}

Tensor ClientModel::forward(const Tensor& x) {
    if (x.ndim() != 3 || x.dim(1) != arch_.input_channels || x.dim(2) != arch_.timesteps) {
        throw ShapeError("client_forward: expected [n," + std::to_string(arch_.input_channels) +
                         "," + std::to_string(arch_.timesteps) + "], got " + to_string(x.shape()));
    }
    Cache c;
    c.x = x;
    c.z1 = conv1d_forward(conv1, x);
    c.pool1 = maxpool1d_forward(leaky_relu(c.z1, arch_.leaky_slope));
    c.z2 = conv1d_forward(conv2, c.pool1.output);
    c.pool2 = maxpool1d_forward(leaky_relu(c.z2, arch_.leaky_slope));
    Tensor out = c.pool2.output.reshaped({x.dim(0), arch_.split_width()});
    cache_ = std::move(c);
    return out;
}

Tensor ClientModel::infer(const Tensor& x) const {
    if (x.ndim() != 3 || x.dim(1) != arch_.input_channels || x.dim(2) != arch_.timesteps) {
        throw ShapeError("client_forward: expected [n," + std::to_string(arch_.input_channels) +
                         "," + std::to_string(arch_.timesteps) + "], got " + to_string(x.shape()));
    }
    Tensor a1 = maxpool1d_forward(leaky_relu(conv1d_forward(conv1, x), arch_.leaky_slope)).output;
    Tensor a2 = maxpool1d_forward(leaky_relu(conv1d_forward(conv2, a1), arch_.leaky_slope)).output;
    return a2.reshaped({x.dim(0), arch_.split_width()});
}

ClientGrads ClientModel::backward(const Tensor& grad_split) {
    if (!cache_) {
        throw std::logic_error("client_backward: no forward cache for this batch");
    }
    Cache c = std::move(*cache_);
    cache_.reset();
    const std::size_t n = c.x.dim(0);
    if (grad_split.shape() != Shape{n, arch_.split_width()}) {
        throw ShapeError("client_backward: upstream " + to_string(grad_split.shape()) +
                         " does not match activation [" + std::to_string(n) + "," +
                         std::to_string(arch_.split_width()) + "]");
    }

    Tensor g = grad_split.reshaped(c.pool2.output.shape());
    g = maxpool1d_backward(c.pool2, g);
    g = leaky_relu_backward(c.z2, g, arch_.leaky_slope);
    Tensor g_a1;
    ClientGrads grads;
    grads.conv2 = conv1d_backward(conv2, c.pool1.output, g, &g_a1);
    g = maxpool1d_backward(c.pool1, g_a1);
    g = leaky_relu_backward(c.z1, g, arch_.leaky_slope);
    grads.conv1 = conv1d_backward(conv1, c.x, g, nullptr);
    return grads;
}

std::vector<Tensor*> ClientModel::parameters() {
    return {&conv1.weight, &conv1.bias, &conv2.weight, &conv2.bias};
}

std::size_t ClientModel::parameter_count() const {
    return conv1.parameter_count() + conv2.parameter_count();
}

ServerModel::ServerModel(Linear layer) : linear(std::move(layer)) {}

Tensor ServerModel::forward(const Tensor& split_activation) {
    Tensor out = linear_forward(linear, split_activation);
    cached_input_ = split_activation;
    return out;
}

ServerStep ServerModel::backward_and_update(const Tensor& grad_logits, float learning_rate,
                                            SplitGradWeights which) {
    if (!cached_input_) {
        throw std::logic_error("server_backward: no cached activation for this batch");
    }
    Tensor a = std::move(*cached_input_);
    cached_input_.reset();
    if (grad_logits.ndim() != 2 || grad_logits.dim(0) != a.dim(0)) {
        throw ShapeError("server_backward: gradient " + to_string(grad_logits.shape()) +
                         " does not match batch of " + std::to_string(a.dim(0)));
    }
    return apply_client_gradients(grad_logits, matmul_tn(a, grad_logits), learning_rate, which);
}

ServerStep ServerModel::apply_client_gradients(const Tensor& grad_logits, const Tensor& grad_weight,
                                               float learning_rate, SplitGradWeights which) {
    if (grad_logits.ndim() != 2 || grad_logits.dim(1) != linear.out_features()) {
        throw ShapeError("server update: dJ/da(L) has shape " + to_string(grad_logits.shape()));
    }
    if (grad_weight.shape() != linear.weight.shape()) {
        throw ShapeError("server update: dJ/dw(L) has shape " + to_string(grad_weight.shape()) +
                         ", expected " + to_string(linear.weight.shape()));
    }
    ServerStep step;
    step.grad_weight = grad_weight;
    step.grad_bias = sum_rows(grad_logits);
    if (which == SplitGradWeights::pre_update) {
        step.grad_split = matmul_nt(grad_logits, linear.weight);
    }
    sgd_step(linear.weight, step.grad_weight, learning_rate);
    sgd_step(linear.bias, step.grad_bias, learning_rate);
    if (which == SplitGradWeights::post_update) {
        step.grad_split = matmul_nt(grad_logits, linear.weight);
    }
    return step;
}

namespace {

class UniformSource {
public:
    explicit UniformSource(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [-bound, bound), 24-bit resolution, identical on every platform.
    float symmetric(float bound) {
        const float u = static_cast<float>(engine_() >> 40) * 0x1.0p-24f;
        return (2.0f * u - 1.0f) * bound;
    }

    void fill(Tensor& t, float bound) {
        for (float& v : t.data()) {
            v = symmetric(bound);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace

SplitModel initialize(const Architecture& arch, ModelInit init) {
    arch.validate();
    ClientModel client(arch);
    Linear head(arch.split_width(), arch.classes);

    UniformSource rng(init.seed);
    const float b1 = 1.0f / std::sqrt(static_cast<float>(arch.input_channels * arch.conv1_kernel));
    const float b2 = 1.0f / std::sqrt(static_cast<float>(arch.conv1_channels * arch.conv2_kernel));
    const float b3 = 1.0f / std::sqrt(static_cast<float>(arch.split_width()));
    rng.fill(client.conv1.weight, b1);
    rng.fill(client.conv1.bias, b1);
    rng.fill(client.conv2.weight, b2);
    rng.fill(client.conv2.bias, b2);
    rng.fill(head.weight, b3);
    rng.fill(head.bias, b3);
    return SplitModel{std::move(client), ServerModel(std::move(head))};
}

void apply_adam(ClientModel& model, const ClientGrads& grads, Adam& optimizer, float learning_rate) {
    optimizer.step(model.parameters(), grads.list(), learning_rate);
}

}  // namespace hesplit::nn
