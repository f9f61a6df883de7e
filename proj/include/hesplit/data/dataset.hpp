#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "hesplit/bytes.hpp"
#include "hesplit/tensor.hpp"

namespace hesplit::data {

inline constexpr std::size_t kLeads = 12;
inline constexpr std::size_t kSteps = 1000;
inline constexpr std::size_t kClasses = 5;

/// Diagnostic superclasses, in label order.
enum class EcgClass : std::uint8_t { NORM = 0, CD = 1, MI = 2, HYP = 3, STTC = 4 };
std::string_view class_name(std::size_t label);

/// Signals [S, 12, 1000] and one label in [0, 5) per sample.
struct EcgDataset {
    Tensor signals{Shape{0, kLeads, kSteps}};
    std::vector<std::uint8_t> labels;

    std::size_t size() const noexcept { return labels.size(); }
    /// Throws DecodeError if shapes or labels are inconsistent.
    void validate() const;
    Tensor gather_signals(std::span<const std::size_t> indices) const;
    std::vector<std::uint8_t> gather_labels(std::span<const std::size_t> indices) const;
    EcgDataset subset(std::span<const std::size_t> indices) const;

    bool operator==(const EcgDataset&) const = default;
};

/**
 * ECGT tensor file:
 *   "ECGT" | version u16 = 1 | count u64 | leads u32 = 12 | steps u32 = 1000
 *   | f32 signals [count*12*1000] | u8 labels [count]
 * all little-endian, with no trailing bytes.
 */
Bytes encode(const EcgDataset& ds);
EcgDataset decode(std::span<const std::uint8_t> bytes);
EcgDataset load(const std::filesystem::path& path);
void save(const EcgDataset& ds, const std::filesystem::path& path);

/// Index batches of size n covering [0, count) once; the last may be short.
/// With shuffle the order is a seeded Fisher-Yates permutation.
std::vector<std::vector<std::size_t>> batch_indices(std::size_t count, std::size_t n, std::uint64_t seed,
                                                    bool shuffle);

/// Per-epoch shuffle seed derived from the run seed.
std::uint64_t epoch_seed(std::uint64_t seed, std::size_t epoch);

/**
 * Synthetic 12-lead, 100 Hz recordings with class-dependent beat shape:
 * NORM plain P-QRS-T; CD wide, notched QRS; MI deep Q and ST elevation;
 * HYP tall QRS; STTC inverted T and ST depression. Adds rate jitter,
 * baseline wander and white noise. Labels are balanced round-robin and the
 * sample order is shuffled.
 */
EcgDataset synth(std::size_t count, std::uint64_t seed, std::size_t classes = kClasses);

}  // namespace hesplit::data
