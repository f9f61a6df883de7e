#include "hesplit/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <numeric>
#include <random>

namespace hesplit::data {

std::string_view class_name(std::size_t label) {
    static constexpr std::string_view names[] = {"NORM", "CD", "MI", "HYP", "STTC"};
    return label < kClasses ? names[label] : "?";
}

void EcgDataset::validate() const {
    const Shape expect{labels.size(), kLeads, kSteps};
    if (signals.shape() != expect) {
        throw DecodeError("dataset: signals " + to_string(signals.shape()) + ", expected " + to_string(expect));
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= kClasses) {
            throw DecodeError("dataset: label " + std::to_string(labels[i]) + " at sample " + std::to_string(i) +
                              " out of range");
        }
    }
}

Tensor EcgDataset::gather_signals(std::span<const std::size_t> indices) const {
    constexpr std::size_t per = kLeads * kSteps;
    Tensor out({indices.size(), kLeads, kSteps});
    const auto src = signals.data();
    auto dst = out.data();
    for (std::size_t k = 0; k < indices.size(); ++k) {
        if (indices[k] >= size()) throw ShapeError("dataset: index out of range");
        std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(indices[k] * per), per,
                    dst.begin() + static_cast<std::ptrdiff_t>(k * per));
    }
    return out;
}

std::vector<std::uint8_t> EcgDataset::gather_labels(std::span<const std::size_t> indices) const {
    std::vector<std::uint8_t> out;
    out.reserve(indices.size());
    for (std::size_t i : indices) out.push_back(labels.at(i));
    return out;
}

EcgDataset EcgDataset::subset(std::span<const std::size_t> indices) const {
    return {gather_signals(indices), gather_labels(indices)};
}

Bytes encode(const EcgDataset& ds) {
    ds.validate();
    Bytes out;
    out.reserve(22 + ds.signals.size() * 4 + ds.size());
    ByteWriter w(out);
    for (char c : {'E', 'C', 'G', 'T'}) w.put<std::uint8_t>(static_cast<std::uint8_t>(c));
    w.put<std::uint16_t>(1);
    w.put<std::uint64_t>(ds.size());
    w.put<std::uint32_t>(kLeads);
    w.put<std::uint32_t>(kSteps);
    for (float v : ds.signals.data()) w.put<float>(v);
    w.put_bytes(ds.labels);
    return out;
}

EcgDataset decode(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes, "ECGT");
    const auto magic = r.get_bytes(4);
    if (!std::equal(magic.begin(), magic.end(), "ECGT")) r.fail("bad magic");
    const auto version = r.get<std::uint16_t>();
    if (version != 1) r.fail("unsupported version " + std::to_string(version));
    const auto count = r.get<std::uint64_t>();
    if (r.get<std::uint32_t>() != kLeads || r.get<std::uint32_t>() != kSteps) r.fail("expected 12 x 1000 samples");
    constexpr std::size_t per = kLeads * kSteps * 4 + 1;
    if (count > r.remaining() / per || r.remaining() != count * per) {
        r.fail("length does not match " + std::to_string(count) + " samples");
    }
    EcgDataset ds;
    ds.signals = Tensor({count, kLeads, kSteps});
    for (float& v : ds.signals.data()) v = r.get<float>();
    const auto labels = r.get_bytes(count);
    ds.labels.assign(labels.begin(), labels.end());
    r.expect_done();
    ds.validate();
    return ds;
}

EcgDataset load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open dataset " + path.string());
    const Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode(bytes);
}

void save(const EcgDataset& ds, const std::filesystem::path& path) {
    const Bytes bytes = encode(ds);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write dataset " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<std::vector<std::size_t>> batch_indices(std::size_t count, std::size_t n, std::uint64_t seed,
                                                    bool shuffle) {
    if (n == 0) throw std::invalid_argument("batch size must be at least 1");
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (shuffle) {
        std::mt19937_64 rng(seed);
        for (std::size_t i = count; i > 1; --i) {
            std::swap(order[i - 1], order[rng() % i]);
        }
    }
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t b = 0; b < count; b += n) {
        out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(b),
                         order.begin() + static_cast<std::ptrdiff_t>(std::min(count, b + n)));
    }
    return out;
}

std::uint64_t epoch_seed(std::uint64_t seed, std::size_t epoch) {
    // splitmix64 finalizer over the pair
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (epoch + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

struct Wave {
    double offset;  // samples relative to the R peak
    double width;   // gaussian sigma in samples
    double amp;
};

struct BeatShape {
    std::vector<Wave> waves;
    double st_shift = 0.0;  // plateau between S and T
    double st_width = 10.0;
};

BeatShape shape_for(std::size_t label, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> jitter(0.85, 1.15);
    const double j = jitter(rng);
    BeatShape b;
    b.waves = {{-17, 2.5, 0.15 * j}, {-3, 1.0, -0.1}, {0, 1.3, 1.0 * j}, {3, 1.3, -0.25}, {30, 5.0, 0.3 * j}};
    switch (label) {
        case 1:  // wide QRS with a second R peak
            b.waves[2].width = 3.0;
            b.waves[3] = {6, 2.5, -0.3};
            b.waves.push_back({6.5, 1.8, 0.55 * j});
            break;
        case 2:  // pathological Q, ST elevation
            b.waves[1] = {-3, 1.5, -0.45 * j};
            b.st_shift = 0.22 * j;
            break;
        case 3:  // tall QRS
            b.waves[2].amp *= 2.0;
            b.waves[3].amp *= 2.4;
            break;
        case 4:  // inverted T, ST depression
            b.waves[4].amp = -0.3 * j;
            b.st_shift = -0.12 * j;
            break;
        default:
            break;
    }
    return b;
}

}  // namespace

EcgDataset synth(std::size_t count, std::uint64_t seed, std::size_t classes) {
    if (classes == 0 || classes > kClasses || count < classes) {
        throw std::invalid_argument("synth: need 1..5 classes and at least one sample per class");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.06);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // Per-lead projection gains: each lead sees the beat with its own sign and size.
    static constexpr double lead_gain[kLeads] = {1.0, 1.2, 0.4, -0.9, 0.5, 0.8, -0.3, 0.2, 0.6, 1.1, 1.2, 1.0};

    std::vector<std::uint8_t> labels(count);
    for (std::size_t i = 0; i < count; ++i) labels[i] = static_cast<std::uint8_t>(i % classes);
    for (std::size_t i = count; i > 1; --i) std::swap(labels[i - 1], labels[rng() % i]);

    EcgDataset ds;
    ds.signals = Tensor({count, kLeads, kSteps});
    ds.labels = labels;
    auto out = ds.signals.data();
    std::vector<double> beat(kSteps);
    for (std::size_t s = 0; s < count; ++s) {
        const BeatShape shape = shape_for(labels[s], rng);
        const double period = 60.0 + 40.0 * unit(rng);  // 60-100 bpm at 100 Hz
        const double phase = period * unit(rng);
        const double amp = 0.8 + 0.4 * unit(rng);
        std::fill(beat.begin(), beat.end(), 0.0);
        for (double r = phase - period; r < static_cast<double>(kSteps) + 40.0; r += period * (0.95 + 0.1 * unit(rng))) {
            for (std::size_t t = 0; t < kSteps; ++t) {
                const double dt = static_cast<double>(t) - r;
                if (dt < -40.0 || dt > 50.0) continue;
                double v = 0.0;
                for (const Wave& w : shape.waves) {
                    const double z = (dt - w.offset) / w.width;
                    v += w.amp * std::exp(-0.5 * z * z);
                }
                if (shape.st_shift != 0.0 && dt > 5.0 && dt < 5.0 + 2.0 * shape.st_width) {
                    v += shape.st_shift;
                }
                beat[t] += v;
            }
        }
        const double wander_f = 0.15 + 0.3 * unit(rng);
        const double wander_p = 2.0 * std::numbers::pi * unit(rng);
        for (std::size_t lead = 0; lead < kLeads; ++lead) {
            const double g = lead_gain[lead] * amp * (0.9 + 0.2 * unit(rng));
            const double wander_a = 0.1 * unit(rng);
            for (std::size_t t = 0; t < kSteps; ++t) {
                const double wander = wander_a * std::sin(2.0 * std::numbers::pi * wander_f * t / 100.0 + wander_p);
                out[(s * kLeads + lead) * kSteps + t] = static_cast<float>(g * beat[t] + wander + noise(rng));
            }
        }
    }
    return ds;
}

}  // namespace hesplit::data
