#include "hesplit/bench/report.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <json.hpp>

#include "hesplit/proto/frame.hpp"

namespace hesplit::bench {

namespace {

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, mode | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << std::setprecision(9);
    return out;
}

// NaN prints as an empty field.
struct Field {
    double v;
};
std::ostream& operator<<(std::ostream& os, Field f) {
    if (!std::isnan(f.v)) os << f.v;
    return os;
}

nlohmann::json number_or_null(double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); }

}  // namespace

double terabits(std::uint64_t bytes) { return static_cast<double>(bytes) * 8.0 / 1e12; }

void write_epochs_csv(const std::filesystem::path& path, const proto::RunReport& rep) {
    auto out = open_out(path);
    out << "epoch,train_loss,train_accuracy,test_accuracy,seconds,bytes_sent_client,bytes_sent_server\n";
    for (const auto& e : rep.epochs) {
        out << e.epoch + 1 << ',' << Field{e.train_loss} << ',' << Field{e.train_accuracy} << ','
            << Field{e.test_accuracy} << ',' << e.seconds << ',' << e.bytes_sent_client << ',' << e.bytes_sent_server
            << '\n';
    }
}

void write_steps_csv(const std::filesystem::path& path, const proto::RunReport& rep) {
    auto out = open_out(path);
    out << "step,loss\n";
    for (std::size_t i = 0; i < rep.step_losses.size(); ++i) out << i + 1 << ',' << rep.step_losses[i] << '\n';
}

void write_summary(const std::filesystem::path& path, const proto::RunReport& rep, const RunInfo& info) {
    double best = std::nan("");
    for (const auto& e : rep.epochs) {
        if (!std::isnan(e.test_accuracy) && !(e.test_accuracy <= best)) best = e.test_accuracy;
    }
    const std::uint64_t total = rep.total_bytes_client() + rep.total_bytes_server();
    nlohmann::json j = {
        {"role", info.role},
        {"mode", proto::mode_name(rep.mode)},
        {"preset", info.preset.empty() ? nlohmann::json(nullptr) : nlohmann::json(info.preset)},
        {"seed", info.seed},
        {"train_samples", info.train_samples},
        {"test_samples", info.test_samples},
        {"epochs", rep.epochs.size()},
        {"training_duration_s", rep.seconds},
        {"best_test_accuracy", number_or_null(best)},
        {"final_test_accuracy", number_or_null(rep.epochs.empty() ? std::nan("") : rep.epochs.back().test_accuracy)},
        {"bytes_sent_client", rep.total_bytes_client()},
        {"bytes_sent_server", rep.total_bytes_server()},
        {"communication_bytes", total},
        {"communication_tb", terabits(total)},
        {"ok", rep.ok()},
        {"error", rep.error},
    };
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

void save_client_weights(const nn::ClientModel& model, const std::filesystem::path& path) {
    Bytes bytes;
    ByteWriter w(bytes);
    for (char c : {'H', 'S', 'C', 'W'}) w.put<std::uint8_t>(static_cast<std::uint8_t>(c));
    w.put<std::uint8_t>(1);
    const Tensor* params[] = {&model.conv1.weight, &model.conv1.bias, &model.conv2.weight, &model.conv2.bias};
    w.put<std::uint32_t>(4);
    for (const Tensor* t : params) proto::write_tensor(w, *t);
    auto out = open_out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

void load_client_weights(nn::ClientModel& model, const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open weights " + path.string());
    const Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    ByteReader r(bytes, "weights");
    const auto magic = r.get_bytes(4);
    if (!std::equal(magic.begin(), magic.end(), "HSCW")) r.fail("bad magic");
    if (r.get<std::uint8_t>() != 1) r.fail("unsupported version");
    auto params = model.parameters();
    if (r.get<std::uint32_t>() != params.size()) r.fail("expected 4 tensors");
    for (Tensor* p : params) {
        const auto ndim = r.get<std::uint8_t>();
        if (ndim != p->ndim()) r.fail("rank mismatch");
        for (std::size_t d = 0; d < ndim; ++d) {
            if (r.get<std::uint64_t>() != p->dim(d)) r.fail("shape mismatch for architecture");
        }
        for (float& v : p->data()) v = r.get<float>();
    }
    r.expect_done();
}

}  // namespace hesplit::bench
