#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hesplit/bytes.hpp"
#include "hesplit/ckks/params.hpp"
#include "hesplit/data/dataset.hpp"
#include "hesplit/nn/model.hpp"
#include "hesplit/proto/frame.hpp"
#include "hesplit/proto/stream.hpp"

namespace hesplit::proto {

enum class Mode : std::uint8_t { plaintext = 0, encrypted = 1 };

std::string mode_name(Mode m);

/// Agreed by both parties before the first batch.
struct TrainConfig {
    double learning_rate = 0.001;
    std::uint32_t batch_size = 4;
    /// Training batches per epoch. 0 on the client means every batch of the
    /// training set; 0 on the server accepts whatever the client proposes.
    std::uint32_t num_batches = 0;
    std::uint32_t epochs = 10;
    Mode mode = Mode::plaintext;
    std::uint64_t seed = 0;  ///< weight initialization

    void validate() const;
    bool operator==(const TrainConfig&) const = default;
};

/// SyncConfig payload: lr f64 | n u32 | N u32 | E u32 | mode u8 | seed u64.
inline constexpr std::size_t kSyncConfigSize = 29;
Bytes encode_config(const TrainConfig& cfg);
TrainConfig decode_config(std::span<const std::uint8_t> bytes);

struct EpochReport {
    std::size_t epoch = 0;
    double train_loss = 0.0;      ///< sample-weighted mean; NaN on the server
    double train_accuracy = 0.0;  ///< NaN on the server
    double test_accuracy = 0.0;   ///< NaN on the server
    double seconds = 0.0;
    std::uint64_t bytes_sent_client = 0;
    std::uint64_t bytes_sent_server = 0;
};

struct RunReport {
    Mode mode = Mode::plaintext;
    std::vector<EpochReport> epochs;
    /// Sync and key exchange before the first epoch, and the closing handshake.
    std::uint64_t setup_bytes_client = 0;
    std::uint64_t setup_bytes_server = 0;
    std::uint64_t teardown_bytes_client = 0;
    std::uint64_t teardown_bytes_server = 0;
    double seconds = 0.0;

    std::vector<float> step_losses;             ///< client and local runs
    std::vector<std::size_t> test_predictions;  ///< argmax of the final evaluation

    /// Frames as seen by this party.
    std::vector<Tag> sent_tags;
    std::vector<Tag> received_tags;
    /// SecretKey objects constructed on the thread running this role.
    std::size_t secret_keys_constructed = 0;

    /// Empty on success.
    std::string error;
    bool ok() const noexcept { return error.empty(); }

    std::uint64_t total_bytes_client() const;
    std::uint64_t total_bytes_server() const;
};

struct ClientOptions {
    nn::Architecture arch{};
    std::chrono::milliseconds timeout{std::chrono::seconds(60)};
    /// Required in encrypted mode.
    std::optional<ckks::CkksParams> he_params;
    /// Fixed seeds make keys and encryption noise reproducible; otherwise
    /// both come from the OS.
    std::optional<std::uint64_t> key_seed;
    std::optional<std::uint64_t> noise_seed;
    /// Shuffle training batches each epoch (seeded from cfg.seed).
    bool shuffle = true;
};

struct ServerOptions {
    nn::Architecture arch{};
    std::chrono::milliseconds timeout{std::chrono::seconds(60)};
    /// The configuration this server is willing to run.
    TrainConfig expected{};
    /// Encrypted mode: reject public contexts for other parameters.
    std::optional<ckks::CkksParams> he_params;
    nn::SplitGradWeights split_grad = nn::SplitGradWeights::pre_update;
};

/// Client role, holding the data and labels: drives the session. The
/// trained client half is copied to final_model when given.
RunReport run_client(ByteStream& stream, TrainConfig cfg, const ClientOptions& opts,
                     const data::EcgDataset& train, const data::EcgDataset& test,
                     nn::ClientModel* final_model = nullptr);

/// Server role: holds only the linear head and, in encrypted mode, the
/// public context received from the client.
RunReport run_server(ByteStream& stream, const ServerOptions& opts);

struct LocalOptions {
    nn::Architecture arch{};
    bool shuffle = true;
    nn::SplitGradWeights split_grad = nn::SplitGradWeights::pre_update;
};

/// The same network trained in one process, with the same batch order,
/// optimizers and arithmetic as a plaintext split run.
RunReport train_local(TrainConfig cfg, const LocalOptions& opts, const data::EcgDataset& train,
                      const data::EcgDataset& test, nn::SplitModel* final_model = nullptr);

/// Number of training batches a client will run per epoch.
std::uint32_t batches_per_epoch(const TrainConfig& cfg, std::size_t train_size);

}  // namespace hesplit::proto
