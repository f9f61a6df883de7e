#include "hesplit/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hesplit::nn {

Conv1d::Conv1d(std::size_t in, std::size_t out, std::size_t kernel_size, std::size_t pad)
    : in_channels(in),
      out_channels(out),
      kernel(kernel_size),
      padding(pad),
      weight(Tensor::zeros({out, in, kernel_size})),
      bias(Tensor::zeros({out})) {}

Conv1d Conv1d::same(std::size_t in, std::size_t out, std::size_t kernel_size) {
    if (kernel_size % 2 == 0) {
        throw ShapeError("same-padded Conv1d needs an odd kernel, got " + std::to_string(kernel_size));
    }
    return Conv1d(in, out, kernel_size, (kernel_size - 1) / 2);
}

std::size_t Conv1d::output_length(std::size_t input_length) const {
    const std::size_t padded = input_length + 2 * padding;
    if (padded < kernel) {
        throw ShapeError("Conv1d: input length " + std::to_string(input_length) +
                         " shorter than kernel");
    }
    return padded - kernel + 1;
}

Tensor conv1d_forward(const Conv1d& layer, const Tensor& x) {
    if (x.ndim() != 3 || x.dim(1) != layer.in_channels) {
        throw ShapeError("conv1d_forward: expected [n," + std::to_string(layer.in_channels) +
                         ",T], got " + to_string(x.shape()));
    }
    const std::size_t n = x.dim(0), c_in = layer.in_channels, c_out = layer.out_channels;
    const std::size_t t_in = x.dim(2), t_out = layer.output_length(t_in);
    const std::size_t m = layer.kernel;
    const long pad = static_cast<long>(layer.padding);

    Tensor out({n, c_out, t_out});
    auto xs = x.data();
    auto ws = layer.weight.data();
    auto zs = out.data();

    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t o = 0; o < c_out; ++o) {
            float* z = &zs[(s * c_out + o) * t_out];
            std::fill(z, z + t_out, layer.bias[o]);
            for (std::size_t i = 0; i < c_in; ++i) {
                const float* xi = &xs[(s * c_in + i) * t_in];
                const float* w = &ws[(o * c_in + i) * m];
                for (std::size_t k = 0; k < m; ++k) {
                    const float wk = w[k];
                    // output t reads input t + k - pad
                    const long shift = static_cast<long>(k) - pad;
                    const std::size_t t_lo = shift < 0 ? static_cast<std::size_t>(-shift) : 0;
                    const long hi = static_cast<long>(t_in) - shift;
                    const std::size_t t_hi = std::min<long>(static_cast<long>(t_out), hi);
                    for (std::size_t t = t_lo; t < t_hi; ++t) {
                        z[t] += wk * xi[static_cast<long>(t) + shift];
                    }
                }
            }
        }
    }
    return out;
}

Conv1dGrads conv1d_backward(const Conv1d& layer, const Tensor& x, const Tensor& grad_out,
                            Tensor* grad_input) {
    if (x.ndim() != 3 || x.dim(1) != layer.in_channels) {
        throw ShapeError("conv1d_backward: bad input shape " + to_string(x.shape()));
    }
    const std::size_t n = x.dim(0), c_in = layer.in_channels, c_out = layer.out_channels;
    const std::size_t t_in = x.dim(2), t_out = layer.output_length(t_in);
    if (grad_out.shape() != Shape{n, c_out, t_out}) {
        throw ShapeError("conv1d_backward: upstream " + to_string(grad_out.shape()) +
                         " does not match output shape");
    }
    const std::size_t m = layer.kernel;
    const long pad = static_cast<long>(layer.padding);

    Conv1dGrads grads{Tensor::zeros(layer.weight.shape()), Tensor::zeros(layer.bias.shape())};
    if (grad_input) {
        *grad_input = Tensor::zeros(x.shape());
    }
    auto xs = x.data();
    auto gs = grad_out.data();
    auto ws = layer.weight.data();
    auto gw = grads.weight.data();

    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t o = 0; o < c_out; ++o) {
            const float* g = &gs[(s * c_out + o) * t_out];
            float gb = 0.0f;
            for (std::size_t t = 0; t < t_out; ++t) {
                gb += g[t];
            }
            grads.bias[o] += gb;
            for (std::size_t i = 0; i < c_in; ++i) {
                const float* xi = &xs[(s * c_in + i) * t_in];
                float* gwi = &gw[(o * c_in + i) * m];
                float* gxi = grad_input ? &grad_input->data()[(s * c_in + i) * t_in] : nullptr;
                const float* w = &ws[(o * c_in + i) * m];
                for (std::size_t k = 0; k < m; ++k) {
                    const long shift = static_cast<long>(k) - pad;
                    const std::size_t t_lo = shift < 0 ? static_cast<std::size_t>(-shift) : 0;
                    const long hi = static_cast<long>(t_in) - shift;
                    const std::size_t t_hi = std::min<long>(static_cast<long>(t_out), hi);
                    float acc = 0.0f;
                    for (std::size_t t = t_lo; t < t_hi; ++t) {
                        acc += g[t] * xi[static_cast<long>(t) + shift];
                    }
                    gwi[k] += acc;
                    if (gxi) {
                        const float wk = w[k];
                        for (std::size_t t = t_lo; t < t_hi; ++t) {
                            gxi[static_cast<long>(t) + shift] += wk * g[t];
                        }
                    }
                }
            }
        }
    }
    return grads;
}

Tensor leaky_relu(const Tensor& z, float slope) {
    Tensor out(z.shape());
    for (std::size_t i = 0; i < z.size(); ++i) {
        const float v = z[i];
        out[i] = v >= 0.0f ? v : slope * v;
    }
    return out;
}

Tensor leaky_relu_backward(const Tensor& z, const Tensor& upstream, float slope) {
    if (z.shape() != upstream.shape()) {
        throw ShapeError("leaky_relu_backward: shape mismatch");
    }
    Tensor out(z.shape());
    for (std::size_t i = 0; i < z.size(); ++i) {
        out[i] = z[i] >= 0.0f ? upstream[i] : slope * upstream[i];
    }
    return out;
}

Pooled maxpool1d_forward(const Tensor& x) {
    if (x.ndim() != 3) {
        throw ShapeError("maxpool1d_forward: expected [n,C,T], got " + to_string(x.shape()));
    }
    const std::size_t t_in = x.dim(2);
    if (t_in % 2 != 0) {
        throw ShapeError("maxpool1d_forward: time length must be even, got " + std::to_string(t_in));
    }
    const std::size_t rows = x.dim(0) * x.dim(1), t_out = t_in / 2;
    Pooled p{Tensor({x.dim(0), x.dim(1), t_out}), std::vector<std::uint32_t>(rows * t_out), x.shape()};
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t t = 0; t < t_out; ++t) {
            const std::size_t a = r * t_in + 2 * t;
            // first element wins on ties
            const std::size_t best = x[a + 1] > x[a] ? a + 1 : a;
            p.output[r * t_out + t] = x[best];
            p.argmax[r * t_out + t] = static_cast<std::uint32_t>(best);
        }
    }
    return p;
}

Tensor maxpool1d_backward(std::span<const std::uint32_t> argmax, const Shape& input_shape,
                          const Tensor& upstream) {
    if (argmax.size() != upstream.size()) {
        throw ShapeError("maxpool1d_backward: index count does not match upstream");
    }
    Tensor out(input_shape);
    for (std::size_t i = 0; i < argmax.size(); ++i) {
        if (argmax[i] >= out.size()) {
            throw ShapeError("maxpool1d_backward: argmax index out of range");
        }
        out[argmax[i]] += upstream[i];
    }
    return out;
}

Tensor maxpool1d_backward(const Pooled& pooled, const Tensor& upstream) {
    if (upstream.shape() != pooled.output.shape()) {
        throw ShapeError("maxpool1d_backward: upstream " + to_string(upstream.shape()) +
                         " does not match pooled output " + to_string(pooled.output.shape()));
    }
    return maxpool1d_backward(pooled.argmax, pooled.input_shape, upstream);
}

Linear::Linear(std::size_t in, std::size_t out)
    : weight(Tensor::zeros({in, out})), bias(Tensor::zeros({out})) {}

Tensor linear_forward(const Linear& layer, const Tensor& a) {
    if (a.ndim() != 2 || a.dim(1) != layer.in_features()) {
        throw ShapeError("linear_forward: expected [n," + std::to_string(layer.in_features()) +
                         "], got " + to_string(a.shape()));
    }
    Tensor out = matmul(a, layer.weight);
    const std::size_t n = out.dim(0), c = out.dim(1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < c; ++j) {
            out[i * c + j] += layer.bias[j];
        }
    }
    return out;
}

LossOutput softmax_cross_entropy(const Tensor& logits, std::span<const std::uint8_t> labels) {
    if (logits.ndim() != 2 || logits.dim(0) != labels.size()) {
        throw ShapeError("softmax_cross_entropy: logits " + to_string(logits.shape()) + " vs " +
                         std::to_string(labels.size()) + " labels");
    }
    const std::size_t n = logits.dim(0), c = logits.dim(1);
    LossOutput out{0.0f, Tensor(logits.shape()), Tensor(logits.shape())};
    double total = 0.0;
    const float inv_n = 1.0f / static_cast<float>(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] >= c) {
            throw std::out_of_range("softmax_cross_entropy: label " + std::to_string(labels[i]) +
                                    " outside [0," + std::to_string(c) + ")");
        }
        const float* row = &logits.data()[i * c];
        const float mx = *std::max_element(row, row + c);
        float denom = 0.0f;
        for (std::size_t j = 0; j < c; ++j) {
            denom += std::exp(row[j] - mx);
        }
        const float log_denom = std::log(denom);
        for (std::size_t j = 0; j < c; ++j) {
            const float p = std::exp(row[j] - mx - log_denom);
            out.probabilities[i * c + j] = p;
            out.grad_logits[i * c + j] = (p - (j == labels[i] ? 1.0f : 0.0f)) * inv_n;
        }
        total += static_cast<double>(log_denom - (row[labels[i]] - mx));
    }
    out.loss = static_cast<float>(total / static_cast<double>(n));
    return out;
}

}  // namespace hesplit::nn
