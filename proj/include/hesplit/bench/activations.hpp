#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hesplit/data/dataset.hpp"
#include "hesplit/nn/model.hpp"

namespace hesplit::bench {

/// Class order of the emitted figures.
inline constexpr std::array<data::EcgClass, 5> kPlotOrder = {data::EcgClass::NORM, data::EcgClass::MI,
                                                             data::EcgClass::HYP, data::EcgClass::CD,
                                                             data::EcgClass::STTC};

/// Pearson correlation; 0 when either series is constant.
double pearson(std::span<const double> a, std::span<const double> b);

/// Repeats every value `factor` times.
std::vector<double> upsample(std::span<const float> v, std::size_t factor);

struct ActivationView {
    data::EcgClass label;
    std::size_t sample = 0;
    Tensor input;       ///< [leads, T]
    Tensor activation;  ///< [channels, T / 4]
    /// Per activation channel: the input lead with the largest |r| after
    /// upsampling the activation to the input length, and that r.
    std::vector<std::size_t> best_lead;
    std::vector<double> best_r;
};

/// First sample of each class in kPlotOrder; classes missing from the
/// dataset are skipped.
std::vector<ActivationView> activation_views(const nn::ClientModel& model, const data::EcgDataset& ds);

/// t, lead_1..lead_L, act_1..act_C. Activation value k sits on row 4k and the
/// other rows leave those columns empty.
void write_activation_csv(const std::filesystem::path& path, const ActivationView& v);
/// Input leads stacked on the left, activation channels on the right.
void write_activation_svg(const std::filesystem::path& path, const ActivationView& v);
/// class, channel, best_lead, pearson for every view.
void write_correlations(const std::filesystem::path& path, std::span<const ActivationView> views);

/// All of the above into dir: <CLASS>.csv, <CLASS>.svg, correlations.csv.
std::vector<std::filesystem::path> plot_activations(const nn::ClientModel& model, const data::EcgDataset& ds,
                                                    const std::filesystem::path& dir);

}  // namespace hesplit::bench
