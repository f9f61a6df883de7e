#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hesplit/nn/layers.hpp"
#include "hesplit/nn/optim.hpp"
#include "hesplit/tensor.hpp"

namespace hesplit::nn {

/// Shape of the two-stage client network plus the server's linear head.
/// The defaults are model M: 12-lead, 1000-step input; conv 12->16 (k7),
/// conv 16->8 (k5), two stride-2 pools, linear 2000->5.
struct Architecture {
    std::size_t input_channels = 12;
    std::size_t timesteps = 1000;
    std::size_t conv1_channels = 16;
    std::size_t conv1_kernel = 7;
    std::size_t conv2_channels = 8;
    std::size_t conv2_kernel = 5;
    std::size_t classes = 5;
    float leaky_slope = 0.01f;

    /// Width of the flattened split-layer activation (conv2_channels * T / 4).
    std::size_t split_width() const;
    std::size_t parameter_count() const;
    void validate() const;
};

/// Seeded initialization: every parameter uniform in +-1/sqrt(fan_in), drawn
/// in a fixed layer order so client and server reproduce identical weights.
struct ModelInit {
    std::uint64_t seed = 0;
};

struct ClientGrads {
    Conv1dGrads conv1;
    Conv1dGrads conv2;

    std::vector<const Tensor*> list() const;
};

/// Client half: conv -> lrelu -> pool -> conv -> lrelu -> pool -> flatten.
class ClientModel {
public:
    explicit ClientModel(const Architecture& arch = {});

    const Architecture& architecture() const noexcept { return arch_; }

    /// Runs the client layers and caches every intermediate for backward.
    Tensor forward(const Tensor& x);
    /// Same computation without touching the cache (evaluation).
    Tensor infer(const Tensor& x) const;
    /// Reverse pass from dJ/da(l). Consumes the forward cache.
    ClientGrads backward(const Tensor& grad_split);
    bool has_cache() const noexcept { return cache_.has_value(); }

    std::vector<Tensor*> parameters();
    std::size_t parameter_count() const;

    Conv1d conv1;
    Conv1d conv2;

private:
    struct Cache {
        Tensor x;
        Tensor z1;
        Pooled pool1;
        Tensor z2;
        Pooled pool2;
    };

    Architecture arch_;
    std::optional<Cache> cache_;
};

/// Which weights feed dJ/da(l) when the server updates in the same round.
enum class SplitGradWeights { pre_update, post_update };

struct ServerStep {
    Tensor grad_split;   ///< dJ/da(l), returned to the client
    Tensor grad_weight;  ///< dJ/dw(L)
    Tensor grad_bias;    ///< dJ/db(L)
};

/// Server half: a single linear layer trained by plain gradient descent.
class ServerModel {
public:
    explicit ServerModel(Linear layer);

    /// a(L) = a(l)·w(L) + b(L); caches a(l).
    Tensor forward(const Tensor& split_activation);
    bool has_cache() const noexcept { return cached_input_.has_value(); }

    /// Plaintext round: dJ/dw from the cached activation, dJ/db as the column
    /// sum, update by gradient descent and return dJ/da(l).
    ServerStep backward_and_update(const Tensor& grad_logits, float learning_rate,
                                   SplitGradWeights which = SplitGradWeights::pre_update);

    /// Encrypted round: the client supplies dJ/dw since the server never sees
    /// the activation in the clear.
    ServerStep apply_client_gradients(const Tensor& grad_logits, const Tensor& grad_weight,
                                      float learning_rate,
                                      SplitGradWeights which = SplitGradWeights::pre_update);

    Linear linear;

private:
    std::optional<Tensor> cached_input_;
};

struct SplitModel {
    ClientModel client;
    ServerModel server;
};

/// Draws all weights of the full network from the seed.
SplitModel initialize(const Architecture& arch, ModelInit init);

/// Adam step over the client's conv parameters.
void apply_adam(ClientModel& model, const ClientGrads& grads, Adam& optimizer, float learning_rate);

}  // namespace hesplit::nn
