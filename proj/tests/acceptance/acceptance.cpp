// End-to-end acceptance run: one PASS/FAIL line per criterion, nonzero exit
// if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "hesplit/ckks/ckks.hpp"
#include "hesplit/proto/training.hpp"
#include "support/fuzz.hpp"
#include "support/reference_model.hpp"

using namespace hesplit;
using namespace std::chrono_literals;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double elapsed(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fuzz::Session session(proto::Mode mode, const data::EcgDataset& train, const data::EcgDataset& test,
                      std::uint32_t epochs, std::uint64_t seed, const char* preset = nullptr) {
    fuzz::Session s;
    s.cfg.batch_size = 4;
    s.cfg.epochs = epochs;
    s.cfg.mode = mode;
    s.cfg.seed = seed;
    s.train = train;
    s.test = test;
    s.server.expected = s.cfg;
    if (preset) {
        s.client.he_params = s.server.he_params = ckks::preset(preset);
        s.client.key_seed = seed + 1000;
        s.client.noise_seed = seed + 2000;
    }
    return s;
}

double max_rel_diff(const std::vector<float>& a, const std::vector<float>& b, std::size_t n) {
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        worst = std::max(worst, std::abs(double(a[i]) - double(b[i])) / std::abs(double(b[i])));
    }
    return worst;
}

Verdict split_equals_local() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto train = data::synth(512, 1), test = data::synth(128, 2);
    fuzz::Session s = session(proto::Mode::plaintext, train, test, 1, 7);
    s.cfg.num_batches = s.server.expected.num_batches = 100;
    const auto [client, server] = fuzz::run_session(s);
    if (!client.ok() || !server.ok()) return {false, "session failed: " + client.error + server.error};
    const proto::RunReport local = proto::train_local(s.cfg, {}, train, test);
    if (client.step_losses.size() != 100 || local.step_losses.size() != 100) return {false, "expected 100 steps"};
    const double rel = max_rel_diff(client.step_losses, local.step_losses, 100);
    const bool same_pred = client.test_predictions == local.test_predictions;
    const double secs = elapsed(t0);
    return {rel <= 1e-5 && same_pred && secs < 120.0,
            fmt("100 steps, max relative loss difference %.3g, %zu test predictions %s, %.1fs", rel,
                local.test_predictions.size(), same_pred ? "identical" : "DIFFER", secs)};
}

Verdict local_accuracy() {
    const char* tr = std::getenv("HESPLIT_PTBXL_TRAIN");
    const char* te = std::getenv("HESPLIT_PTBXL_TEST");
    proto::TrainConfig cfg;
    cfg.epochs = 10;
    cfg.seed = 3;
    if (tr && te && std::filesystem::exists(tr) && std::filesystem::exists(te)) {
        const auto train = data::load(tr), test = data::load(te);
        const proto::RunReport r = proto::train_local(cfg, {}, train, test);
        double best = 0.0, secs = 0.0;
        for (const auto& e : r.epochs) {
            best = std::max(best, e.test_accuracy);
            secs += e.seconds;
        }
        const double per_epoch = secs / static_cast<double>(r.epochs.size());
        return {std::abs(100.0 * best - 67.68) <= 1.5 && per_epoch <= 5 * 10.56,
                fmt("PTB-XL %zu/%zu samples: best test accuracy %.2f%% (target 67.68 +- 1.5), %.1fs per epoch",
                    train.size(), test.size(), 100.0 * best, per_epoch)};
    }
    const proto::RunReport r = proto::train_local(cfg, {}, data::synth(512, 1), data::synth(128, 2));
    const double acc = r.epochs.back().test_accuracy;
    return {acc > 0.60, fmt("PTB-XL files not supplied (HESPLIT_PTBXL_TRAIN/TEST); synth(512) 10 epochs: "
                            "test accuracy %.2f%% (needs > 60%%), %.1fs",
                            100.0 * acc, r.seconds)};
}

Verdict gradient_correctness() {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    std::size_t dropped = 0, refined = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto check = oracle::check_gradients(oracle::toy_architecture(), 2, seed);
        worst = std::max(worst, check.worst());
        dropped += check.dropped;
        refined += check.refined;
    }
    const double secs = elapsed(t0);
    return {worst < 1e-3 && dropped == 0 && secs < 60.0,
            fmt("20 seeds, worst relative error %.3g, %zu coordinates needed a smaller step, %zu uncompared, %.1fs",
                worst, refined, dropped, secs)};
}

Verdict ckks_homomorphism() {
    const auto t0 = std::chrono::steady_clock::now();
    bool pass = true;
    std::ostringstream detail;
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (const auto& name : ckks::preset_names()) {
        const ckks::PrivateContext ctx = ckks::keygen(ckks::preset(name), 42);
        ckks::Prng noise(43);
        double rt = 0.0, mm = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> v(2000);
            for (double& x : v) x = unit(rng);
            Tensor w({2000, 5}), b({5});
            for (float& x : w.data()) x = static_cast<float>(unit(rng) / std::sqrt(2000.0));
            for (float& x : b.data()) x = static_cast<float>(unit(rng) / std::sqrt(2000.0));
            const ckks::EncryptedVector ev = ckks::encrypt_vector(ctx, v, noise);
            const auto back = ckks::decrypt_vector(ctx, ev);
            for (std::size_t i = 0; i < v.size(); ++i) rt = std::max(rt, std::abs(back[i] - v[i]));
            const auto y = ckks::decrypt_vector(ctx, ckks::vec_matmul_plain(ctx, ev, w, b));
            for (std::size_t j = 0; j < 5; ++j) {
                long double ref = b[j];
                for (std::size_t i = 0; i < 2000; ++i) ref += static_cast<long double>(v[i]) * w[i * 5 + j];
                mm = std::max(mm, static_cast<double>(std::abs(y[j] - ref)));
            }
        }
        const bool ok = rt < 1e-3 && mm < 1e-2;
        pass = pass && ok;
        detail << name << " roundtrip " << fmt("%.2e", rt) << " matmul " << fmt("%.2e", mm) << (ok ? "" : " (over)")
               << "; ";
    }
    const double secs = elapsed(t0);
    detail << fmt("%.1fs", secs);
    return {pass && secs < 600.0, detail.str()};
}

struct ModePair {
    proto::RunReport plain;
    proto::RunReport enc;
};

ModePair both_modes(const data::EcgDataset& train, const data::EcgDataset& test, std::uint32_t epochs,
                    std::uint64_t seed, const char* preset) {
    ModePair out;
    out.plain = fuzz::run_session(session(proto::Mode::plaintext, train, test, epochs, seed)).first;
    out.enc = fuzz::run_session(session(proto::Mode::encrypted, train, test, epochs, seed, preset)).first;
    return out;
}

Verdict encrypted_fidelity() {
    const auto t0 = std::chrono::steady_clock::now();
    const ModePair r = both_modes(data::synth(256, 1), data::synth(128, 2), 2, 7, "p4096b");
    if (!r.plain.ok() || !r.enc.ok()) return {false, "session failed: " + r.plain.error + r.enc.error};
    const double gap = 100.0 * std::abs(r.enc.epochs.back().test_accuracy - r.plain.epochs.back().test_accuracy);
    const double drift = max_rel_diff(r.enc.step_losses, r.plain.step_losses, 50);
    const double secs = elapsed(t0);
    return {gap <= 5.0 && drift < 1e-2 && secs < 3600.0,
            fmt("p4096b, 2 epochs: test accuracy plain %.2f%% enc %.2f%% (gap %.2f points), max relative loss "
                "difference over 50 steps %.3g, %.1fs",
                100.0 * r.plain.epochs.back().test_accuracy, 100.0 * r.enc.epochs.back().test_accuracy, gap, drift,
                secs)};
}

Verdict accuracy_gap() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto train = data::synth(512, 1), test = data::synth(128, 2);
    double total = 0.0;
    std::ostringstream detail;
    for (std::uint64_t seed : {11, 12, 13}) {
        const ModePair r = both_modes(train, test, 10, seed, "p4096b");
        if (!r.plain.ok() || !r.enc.ok()) return {false, "session failed: " + r.plain.error + r.enc.error};
        const double p = r.plain.epochs.back().test_accuracy, e = r.enc.epochs.back().test_accuracy;
        total += 100.0 * (p - e);
        detail << fmt("seed %llu plain %.2f%% enc %.2f%%; ", static_cast<unsigned long long>(seed), 100 * p, 100 * e);
    }
    const double mean = total / 3.0;
    detail << fmt("mean gap %.2f points, %.1fs", mean, elapsed(t0));
    return {mean <= 5.0, "p4096b, 10 epochs: " + detail.str()};
}

Verdict communication() {
    const auto train = data::synth(64, 1), test = data::synth(16, 2);
    const auto [plain, plain_srv] = fuzz::run_session(session(proto::Mode::plaintext, train, test, 1, 7));
    if (!plain.ok()) return {false, "plain session failed: " + plain.error};
    // Closed form: every frame is 9 header bytes plus its payload.
    auto tensor = [](std::uint64_t r, std::uint64_t c) { return 9 + 1 + 16 + 4 * r * c; };
    const std::uint64_t expect_client = (9 + 29) + 16 * (tensor(4, 2000) + tensor(4, 5)) + (9 + 4) +
                                        4 * tensor(4, 2000) + 9;
    const std::uint64_t expect_server = (9 + 29) + 16 * (tensor(4, 5) + tensor(4, 2000)) + 4 * tensor(4, 5) + 9;
    const bool exact = plain.total_bytes_client() == expect_client && plain.total_bytes_server() == expect_server &&
                       plain_srv.total_bytes_client() == expect_client &&
                       plain_srv.total_bytes_server() == expect_server;

    auto enc_bytes = [&](const char* preset) {
        const auto r = fuzz::run_session(session(proto::Mode::encrypted, train, test, 1, 7, preset)).first;
        return r.ok() ? r.total_bytes_client() + r.total_bytes_server() : 0;
    };
    const std::uint64_t big = enc_bytes("p8192a"), small = enc_bytes("p2048");
    const double ratio = small ? static_cast<double>(big) / static_cast<double>(small) : 0.0;
    return {exact && ratio >= 30.0 && ratio <= 300.0,
            fmt("plain %llu/%llu bytes vs closed form %llu/%llu (%s); enc p8192a %llu bytes, p2048 %llu bytes, "
                "ratio %.2f (needs 30..300)",
                static_cast<unsigned long long>(plain.total_bytes_client()),
                static_cast<unsigned long long>(plain.total_bytes_server()),
                static_cast<unsigned long long>(expect_client), static_cast<unsigned long long>(expect_server),
                exact ? "exact" : "MISMATCH", static_cast<unsigned long long>(big),
                static_cast<unsigned long long>(small), ratio)};
}

Verdict key_confinement() {
    const auto [client, server] = fuzz::run_session(
        session(proto::Mode::encrypted, data::synth(32, 1), data::synth(8, 2), 1, 7, "p4096b"));
    if (!client.ok() || !server.ok()) return {false, "session failed: " + client.error + server.error};
    std::size_t plain_out = 0;
    for (auto t : server.sent_tags) plain_out += t == proto::Tag::server_out_plain;
    std::size_t plain_act = 0;
    for (auto t : server.received_tags) plain_act += t == proto::Tag::activation_plain;
    return {server.secret_keys_constructed == 0 && plain_out == 0 && plain_act == 0 &&
                client.secret_keys_constructed > 0,
            fmt("server thread built %zu secret keys (client %zu); server sent %zu of %zu frames as 0x20 and "
                "received %zu plaintext activations",
                server.secret_keys_constructed, client.secret_keys_constructed, plain_out, server.sent_tags.size(),
                plain_act)};
}

Verdict protocol_robustness() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(777);
    std::size_t cases = 0, clean = 0;
    std::string first_bad;
    for (auto [mode, count] : {std::pair{proto::Mode::plaintext, 700}, std::pair{proto::Mode::encrypted, 300}}) {
        const fuzz::Session s = fuzz::small_session(mode);
        const fuzz::Outcome base = fuzz::run_case(s, {.enabled = false});
        if (!base.client.ok() || !base.server.ok()) return {false, "unmutated session failed"};
        for (int i = 0; i < count; ++i) {
            const auto m = static_cast<fuzz::Mutation>(i % 3);
            const std::size_t span = m == fuzz::Mutation::reorder ? base.frames - 4 : base.frames;
            const fuzz::Outcome o = fuzz::run_case(s, {m, rng() % span, rng()});
            ++cases;
            if (o.applied && fuzz::clean_abort(o, 2.5)) {
                ++clean;
            } else if (first_bad.empty()) {
                first_bad = o.detail + " client '" + o.client.error + "' server '" + o.server.error + "'";
            }
        }
    }
    return {cases >= 1000 && clean == cases,
            fmt("%zu/%zu mutated sessions aborted cleanly, %.1fs", clean, cases, elapsed(t0)) +
                (first_bad.empty() ? "" : "; first failure: " + first_bad)};
}

}  // namespace

int main(int argc, char** argv) {
    // Optional arguments select criteria by name.
    auto wanted = [&](const char* name) {
        if (argc < 2) return true;
        for (int i = 1; i < argc; ++i) {
            if (std::string(argv[i]) == name) return true;
        }
        return false;
    };
    const std::pair<const char*, std::function<Verdict()>> criteria[] = {
        {"split-equals-local", split_equals_local},
        {"local-accuracy", local_accuracy},
        {"gradient-correctness", gradient_correctness},
        {"ckks-homomorphism", ckks_homomorphism},
        {"encrypted-fidelity", encrypted_fidelity},
        {"accuracy-gap", accuracy_gap},
        {"communication-accounting", communication},
        {"key-confinement", key_confinement},
        {"protocol-robustness", protocol_robustness},
    };
    int failed = 0, ran = 0;
    for (const auto& [name, run] : criteria) {
        if (!wanted(name)) continue;
        ++ran;
        Verdict v;
        try {
            v = run();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        failed += !v.pass;
        std::printf("%s %s: %s\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %d criteria failed\n", failed, ran);
    return failed == 0 ? 0 : 1;
}
