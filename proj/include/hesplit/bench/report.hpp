#pragma once

#include <filesystem>
#include <string>

#include "hesplit/nn/model.hpp"
#include "hesplit/proto/training.hpp"

namespace hesplit::bench {

/// Bytes to terabits, the unit used in published communication tables.
double terabits(std::uint64_t bytes);

/// One row per epoch.
void write_epochs_csv(const std::filesystem::path& path, const proto::RunReport& rep);
/// One row per training step.
void write_steps_csv(const std::filesystem::path& path, const proto::RunReport& rep);

struct RunInfo {
    std::string role;    // local, client or server
    std::string preset;  // empty in plaintext mode
    std::uint64_t seed = 0;
    std::size_t train_samples = 0;
    std::size_t test_samples = 0;
};

/// Duration, best test accuracy and communication in bytes and Tb, as JSON.
void write_summary(const std::filesystem::path& path, const proto::RunReport& rep, const RunInfo& info);

/// "HSCW" | version u8 | count u32 | tensor*; the client's conv parameters.
void save_client_weights(const nn::ClientModel& model, const std::filesystem::path& path);
/// Loads into a model of matching architecture; throws DecodeError.
void load_client_weights(nn::ClientModel& model, const std::filesystem::path& path);

}  // namespace hesplit::bench
