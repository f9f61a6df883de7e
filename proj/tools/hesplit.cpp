// Command-line entry points: local training, the two split roles, dataset
// generation and activation plots.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>

#include "hesplit/bench/activations.hpp"
#include "hesplit/bench/report.hpp"
#include "hesplit/ckks/params.hpp"
#include "hesplit/data/dataset.hpp"
#include "hesplit/proto/stream.hpp"
#include "hesplit/proto/training.hpp"

namespace fs = std::filesystem;
using namespace hesplit;

namespace {

struct DataArgs {
    std::string train_file;
    std::string test_file;
    std::size_t synth_train = 512;
    std::size_t synth_test = 128;
    std::uint64_t data_seed = 1;

    void add(CLI::App& cmd) {
        cmd.add_option("--train", train_file, "Training set (ECGT file)")->check(CLI::ExistingFile);
        cmd.add_option("--test", test_file, "Test set (ECGT file)")->check(CLI::ExistingFile);
        cmd.add_option("--synth-train", synth_train, "Synthetic training samples when --train is absent");
        cmd.add_option("--synth-test", synth_test, "Synthetic test samples when --test is absent");
        cmd.add_option("--data-seed", data_seed, "Seed of the synthetic sets");
    }

    data::EcgDataset train() const { return train_file.empty() ? data::synth(synth_train, data_seed) : data::load(train_file); }
    // Offset seed so the test set never repeats training samples.
    data::EcgDataset test() const {
        return test_file.empty() ? data::synth(synth_test, data_seed + 0x7e57) : data::load(test_file);
    }
};

struct RunArgs {
    std::string mode = "plain";
    std::string preset;
    std::uint32_t epochs = 10;
    std::uint32_t batch = 4;
    std::uint32_t batches = 0;
    double lr = 0.001;
    std::uint64_t seed = 0;
    std::string out = "out";
    double timeout = 60.0;

    void add(CLI::App& cmd, bool with_mode) {
        if (with_mode) {
            cmd.add_option("--mode", mode, "plain or enc")->check(CLI::IsMember({"plain", "enc"}));
            cmd.add_option("--preset", preset, "CKKS preset, required with --mode enc")
                ->check(CLI::IsMember(ckks::preset_names()));
            cmd.add_option("--timeout", timeout, "Seconds to wait for each frame");
        }
        cmd.add_option("--epochs", epochs, "Training epochs");
        cmd.add_option("--batch", batch, "Mini-batch size")->check(CLI::PositiveNumber);
        cmd.add_option("--batches", batches, "Batches per epoch (0: whole training set)");
        cmd.add_option("--lr", lr, "Learning rate")->check(CLI::NonNegativeNumber);
        cmd.add_option("--seed", seed, "Weight initialization and shuffle seed");
        cmd.add_option("--out", out, "Output directory");
    }

    proto::TrainConfig config() const {
        if (mode == "enc" && preset.empty()) throw CLI::ValidationError("--preset", "required with --mode enc");
        if (mode == "plain" && !preset.empty()) throw CLI::ValidationError("--preset", "only valid with --mode enc");
        proto::TrainConfig cfg;
        cfg.learning_rate = lr;
        cfg.batch_size = batch;
        cfg.num_batches = batches;
        cfg.epochs = epochs;
        cfg.mode = mode == "enc" ? proto::Mode::encrypted : proto::Mode::plaintext;
        cfg.seed = seed;
        return cfg;
    }

    std::chrono::milliseconds wait() const {
        return std::chrono::milliseconds(static_cast<long long>(timeout * 1000.0));
    }
};

void print_epochs(const proto::RunReport& rep) {
    for (const auto& e : rep.epochs) {
        if (std::isnan(e.train_loss)) {
            std::printf("epoch %zu  %.2fs  client %llu B  server %llu B\n", e.epoch + 1, e.seconds,
                        static_cast<unsigned long long>(e.bytes_sent_client),
                        static_cast<unsigned long long>(e.bytes_sent_server));
        } else {
            std::printf("epoch %zu  loss %.4f  train %.2f%%  test %.2f%%  %.2fs\n", e.epoch + 1, e.train_loss,
                        100.0 * e.train_accuracy, 100.0 * e.test_accuracy, e.seconds);
        }
    }
}

int finish(const proto::RunReport& rep, const RunArgs& args, const bench::RunInfo& info) {
    const fs::path out(args.out);
    bench::write_epochs_csv(out / (info.role + "_epochs.csv"), rep);
    if (!rep.step_losses.empty()) bench::write_steps_csv(out / (info.role + "_steps.csv"), rep);
    bench::write_summary(out / (info.role + "_summary.json"), rep, info);
    const std::uint64_t total = rep.total_bytes_client() + rep.total_bytes_server();
    std::printf("%s: %.2fs, %llu bytes (%.6f Tb)\n", info.role.c_str(), rep.seconds,
                static_cast<unsigned long long>(total), bench::terabits(total));
    if (!rep.ok()) {
        std::fprintf(stderr, "error: %s\n", rep.error.c_str());
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Split learning of a 1D CNN with a CKKS-encrypted server layer"};
    app.require_subcommand(1);

    DataArgs data_args;
    RunArgs run_args;
    std::string endpoint = "127.0.0.1:7000";
    std::string weights;

    auto* local = app.add_subcommand("train-local", "Train the whole network in one process");
    data_args.add(*local);
    run_args.add(*local, false);
    local->add_option("--save-weights", weights, "Write the trained client weights here");

    auto* serve = app.add_subcommand("serve", "Run the server role for one session");
    run_args.add(*serve, true);
    serve->add_option("--endpoint", endpoint, "host:port to listen on");

    DataArgs client_data;
    RunArgs client_args;
    std::string client_endpoint = "127.0.0.1:7000";
    std::string client_weights;
    auto* client = app.add_subcommand("train-client", "Run the client role against a server");
    client_data.add(*client);
    client_args.add(*client, true);
    client->add_option("--endpoint", client_endpoint, "Server host:port");
    client->add_option("--save-weights", client_weights, "Write the trained client weights here");

    std::string plot_weights, plot_data, plot_out = "plots";
    std::uint64_t plot_seed = 1;
    auto* plot = app.add_subcommand("plot-activations", "Input leads next to split-layer activations, one figure per class");
    plot->add_option("--weights", plot_weights, "Client weights from --save-weights")->required()->check(CLI::ExistingFile);
    plot->add_option("--test", plot_data, "Samples to plot (ECGT); synthetic when absent")->check(CLI::ExistingFile);
    plot->add_option("--data-seed", plot_seed, "Seed of the synthetic samples");
    plot->add_option("--out", plot_out, "Output directory");

    std::string synth_out;
    std::size_t synth_count = 512;
    std::uint64_t synth_seed = 1;
    auto* gen = app.add_subcommand("synth", "Write a synthetic ECGT dataset");
    gen->add_option("--count", synth_count, "Samples")->check(CLI::PositiveNumber);
    gen->add_option("--seed", synth_seed, "Generator seed");
    gen->add_option("--out", synth_out, "Output file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*local) {
            const proto::TrainConfig cfg = run_args.config();
            const auto train = data_args.train(), test = data_args.test();
            proto::LocalOptions opts;
            nn::SplitModel trained = nn::initialize(opts.arch, {cfg.seed});
            const proto::RunReport rep = proto::train_local(cfg, opts, train, test, &trained);
            print_epochs(rep);
            if (!weights.empty()) bench::save_client_weights(trained.client, weights);
            return finish(rep, run_args, {"local", "", cfg.seed, train.size(), test.size()});
        }
        if (*serve) {
            proto::ServerOptions opts;
            opts.expected = run_args.config();
            opts.timeout = run_args.wait();
            if (!run_args.preset.empty()) opts.he_params = ckks::preset(run_args.preset);
            proto::TcpListener listener(proto::Endpoint::parse(endpoint));
            std::printf("listening on port %u\n", listener.port());
            std::fflush(stdout);
            auto stream = listener.accept(std::chrono::hours(24));
            const proto::RunReport rep = proto::run_server(*stream, opts);
            print_epochs(rep);
            return finish(rep, run_args, {"server", run_args.preset, opts.expected.seed, 0, 0});
        }
        if (*client) {
            const proto::TrainConfig cfg = client_args.config();
            const auto train = client_data.train(), test = client_data.test();
            proto::ClientOptions opts;
            opts.timeout = client_args.wait();
            if (!client_args.preset.empty()) opts.he_params = ckks::preset(client_args.preset);
            auto stream = proto::tcp_connect(proto::Endpoint::parse(client_endpoint), std::chrono::seconds(30));
            nn::ClientModel trained(opts.arch);
            const proto::RunReport rep = proto::run_client(*stream, cfg, opts, train, test, &trained);
            print_epochs(rep);
            if (!client_weights.empty() && rep.ok()) bench::save_client_weights(trained, client_weights);
            return finish(rep, client_args, {"client", client_args.preset, cfg.seed, train.size(), test.size()});
        }
        if (*plot) {
            nn::ClientModel model{nn::Architecture{}};
            bench::load_client_weights(model, plot_weights);
            const auto ds = plot_data.empty() ? data::synth(50, plot_seed) : data::load(plot_data);
            for (const auto& p : bench::plot_activations(model, ds, plot_out)) std::printf("%s\n", p.c_str());
            return 0;
        }
        if (*gen) {
            data::save(data::synth(synth_count, synth_seed), synth_out);
            return 0;
        }
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
