#include "hesplit/bench/activations.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace hesplit::bench {

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.empty()) throw std::invalid_argument("pearson: length mismatch");
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return saa == 0.0 || sbb == 0.0 ? 0.0 : sab / std::sqrt(saa * sbb);
}

std::vector<double> upsample(std::span<const float> v, std::size_t factor) {
    std::vector<double> out;
    out.reserve(v.size() * factor);
    for (float x : v) out.insert(out.end(), factor, static_cast<double>(x));
    return out;
}

std::vector<ActivationView> activation_views(const nn::ClientModel& model, const data::EcgDataset& ds) {
    const auto& arch = model.architecture();
    const std::size_t leads = arch.input_channels, steps = arch.timesteps;
    const std::size_t channels = arch.conv2_channels, width = steps / 4;
    std::vector<ActivationView> views;
    for (data::EcgClass cls : kPlotOrder) {
        const auto it = std::find(ds.labels.begin(), ds.labels.end(), static_cast<std::uint8_t>(cls));
        if (it == ds.labels.end()) continue;
        const std::size_t idx[] = {static_cast<std::size_t>(it - ds.labels.begin())};
        ActivationView v{cls, idx[0], {}, {}, {}, {}};
        const Tensor x = ds.gather_signals(idx);
        v.input = x.reshaped({leads, steps});
        v.activation = model.infer(x).reshaped({channels, width});
        std::vector<std::vector<double>> lead_series(leads);
        for (std::size_t l = 0; l < leads; ++l) {
            lead_series[l].assign(v.input.data().begin() + static_cast<std::ptrdiff_t>(l * steps),
                                  v.input.data().begin() + static_cast<std::ptrdiff_t>((l + 1) * steps));
        }
        for (std::size_t c = 0; c < channels; ++c) {
            const auto up = upsample(v.activation.data().subspan(c * width, width), 4);
            std::size_t best = 0;
            double best_r = 0.0;
            for (std::size_t l = 0; l < leads; ++l) {
                const double r = pearson(up, lead_series[l]);
                if (std::abs(r) > std::abs(best_r)) {
                    best_r = r;
                    best = l;
                }
            }
            v.best_lead.push_back(best);
            v.best_r.push_back(best_r);
        }
        views.push_back(std::move(v));
    }
    return views;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << std::setprecision(7);
    return out;
}

// Polyline of one series scaled into the box (x, y, w, h).
std::string polyline(std::span<const float> v, double x, double y, double w, double h, const char* color) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    const double span = *hi > *lo ? *hi - *lo : 1.0;
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << "<polyline fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"0.8\" points=\"";
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double px = x + w * static_cast<double>(i) / static_cast<double>(std::max<std::size_t>(1, v.size() - 1));
        const double py = y + h - h * (v[i] - *lo) / span;
        os << px << ',' << py << ' ';
    }
    os << "\"/>\n";
    return os.str();
}

}  // namespace

void write_activation_csv(const std::filesystem::path& path, const ActivationView& v) {
    const std::size_t leads = v.input.dim(0), steps = v.input.dim(1);
    const std::size_t channels = v.activation.dim(0), width = v.activation.dim(1);
    const std::size_t factor = steps / width;
    auto out = open_out(path);
    out << 't';
    for (std::size_t l = 0; l < leads; ++l) out << ",lead_" << l + 1;
    for (std::size_t c = 0; c < channels; ++c) out << ",act_" << c + 1;
    out << '\n';
    for (std::size_t t = 0; t < steps; ++t) {
        out << t;
        for (std::size_t l = 0; l < leads; ++l) out << ',' << v.input[l * steps + t];
        for (std::size_t c = 0; c < channels; ++c) {
            out << ',';
            if (t % factor == 0) out << v.activation[c * width + t / factor];
        }
        out << '\n';
    }
}

void write_activation_svg(const std::filesystem::path& path, const ActivationView& v) {
    const std::size_t leads = v.input.dim(0), steps = v.input.dim(1);
    const std::size_t channels = v.activation.dim(0), width = v.activation.dim(1);
    constexpr double W = 1200, row = 48, pad = 20, panel = 560;
    const double H = pad * 3 + row * static_cast<double>(std::max(leads, channels));
    auto out = open_out(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << pad << "\" y=\"14\">" << data::class_name(static_cast<std::size_t>(v.label))
        << " sample " << v.sample << ": input leads</text>\n"
        << "<text x=\"" << pad * 2 + panel << "\" y=\"14\">split-layer activations</text>\n";
    for (std::size_t l = 0; l < leads; ++l) {
        out << polyline(v.input.data().subspan(l * steps, steps), pad, pad + row * l + 4, panel, row - 8, "#1f4e9a");
    }
    for (std::size_t c = 0; c < channels; ++c) {
        const double y = pad + row * c + 4;
        out << polyline(v.activation.data().subspan(c * width, width), pad * 2 + panel, y, panel, row - 8, "#b03a2e");
        out << "<text x=\"" << W - pad - 110 << "\" y=\"" << y + 10 << "\">r=" << std::setprecision(3) << v.best_r[c]
            << " lead " << v.best_lead[c] + 1 << "</text>\n";
    }
    out << "</svg>\n";
}

void write_correlations(const std::filesystem::path& path, std::span<const ActivationView> views) {
    auto out = open_out(path);
    out << "class,channel,best_lead,pearson\n";
    for (const auto& v : views) {
        for (std::size_t c = 0; c < v.best_r.size(); ++c) {
            out << data::class_name(static_cast<std::size_t>(v.label)) << ',' << c + 1 << ',' << v.best_lead[c] + 1
                << ',' << v.best_r[c] << '\n';
        }
    }
}

std::vector<std::filesystem::path> plot_activations(const nn::ClientModel& model, const data::EcgDataset& ds,
                                                    const std::filesystem::path& dir) {
    const auto views = activation_views(model, ds);
    std::vector<std::filesystem::path> written;
    for (const auto& v : views) {
        const std::string name(data::class_name(static_cast<std::size_t>(v.label)));
        written.push_back(dir / (name + ".csv"));
        write_activation_csv(written.back(), v);
        written.push_back(dir / (name + ".svg"));
        write_activation_svg(written.back(), v);
    }
    written.push_back(dir / "correlations.csv");
    write_correlations(written.back(), views);
    return written;
}

}  // namespace hesplit::bench
