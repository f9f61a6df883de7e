#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hesplit/tensor.hpp"

namespace hesplit::nn {

/// 1-D convolution (cross-correlation) with zero padding and unit stride.
/// weight is [out_channels, in_channels, kernel], bias is [out_channels].
struct Conv1d {
    std::size_t in_channels = 0;
    std::size_t out_channels = 0;
    std::size_t kernel = 0;
    std::size_t padding = 0;
    Tensor weight;
    Tensor bias;

    Conv1d() = default;
    Conv1d(std::size_t in, std::size_t out, std::size_t kernel_size, std::size_t pad);

    /// Same-padded layer: odd kernel, padding (kernel - 1) / 2.
    static Conv1d same(std::size_t in, std::size_t out, std::size_t kernel_size);

    std::size_t output_length(std::size_t input_length) const;
    std::size_t parameter_count() const { return weight.size() + bias.size(); }
};

struct Conv1dGrads {
    Tensor weight;
    Tensor bias;
};

/// x: [n, C, T] -> [n, C', T + 2p - m + 1].
Tensor conv1d_forward(const Conv1d& layer, const Tensor& x);

/// Parameter gradients for a conv layer given its forward input and the
/// upstream gradient. When grad_input is non-null it receives dJ/dx.
Conv1dGrads conv1d_backward(const Conv1d& layer, const Tensor& x, const Tensor& grad_out,
                            Tensor* grad_input);

Tensor leaky_relu(const Tensor& z, float slope);
Tensor leaky_relu_backward(const Tensor& z, const Tensor& upstream, float slope);

/// Output of a kernel-2, stride-2 max pool. argmax holds, per output element,
/// the flat index into the input that produced it.
struct Pooled {
    Tensor output;
    std::vector<std::uint32_t> argmax;
    Shape input_shape;
};

Pooled maxpool1d_forward(const Tensor& x);
Tensor maxpool1d_backward(const Pooled& pooled, const Tensor& upstream);
/// Routing form used by tests: scatter upstream to explicit flat positions.
Tensor maxpool1d_backward(std::span<const std::uint32_t> argmax, const Shape& input_shape,
                          const Tensor& upstream);

/// Fully connected layer; weight is [in, out] so that y = a·W + b.
struct Linear {
    Tensor weight;
    Tensor bias;

    Linear() = default;
    Linear(std::size_t in, std::size_t out);
    std::size_t in_features() const { return weight.dim(0); }
    std::size_t out_features() const { return weight.dim(1); }
    std::size_t parameter_count() const { return weight.size() + bias.size(); }
};

Tensor linear_forward(const Linear& layer, const Tensor& a);

struct LossOutput {
    float loss = 0.0f;
    Tensor probabilities;
    Tensor grad_logits;
};

/// Mean softmax cross-entropy over the batch. Softmax uses max subtraction.
/// grad_logits = (softmax - onehot) / n.
LossOutput softmax_cross_entropy(const Tensor& logits, std::span<const std::uint8_t> labels);

}  // namespace hesplit::nn
