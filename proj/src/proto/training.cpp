#include "hesplit/proto/training.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "hesplit/ckks/ckks.hpp"
#include "hesplit/ckks/serialize.hpp"

namespace hesplit::proto {

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::size_t count_correct(const Tensor& logits, std::span<const std::uint8_t> labels) {
    const auto pred = argmax_rows(logits);
    std::size_t ok = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) ok += pred[i] == labels[i];
    return ok;
}

Bytes encode_u32(std::uint32_t v) {
    Bytes out;
    ByteWriter(out).put<std::uint32_t>(v);
    return out;
}

std::uint32_t decode_u32(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes, "EpochDone");
    const auto v = r.get<std::uint32_t>();
    r.expect_done();
    return v;
}

void require_shape(const Tensor& t, const Shape& expect, const char* what) {
    if (t.shape() != expect) {
        throw ProtocolError(std::string(what) + " has shape " + to_string(t.shape()) + ", expected " +
                            to_string(expect));
    }
}

std::vector<std::vector<std::size_t>> epoch_batches(const TrainConfig& cfg, std::size_t train_size,
                                                    std::size_t epoch, bool shuffle) {
    auto batches = data::batch_indices(train_size, cfg.batch_size, data::epoch_seed(cfg.seed, epoch), shuffle);
    batches.resize(cfg.num_batches);
    return batches;
}

/// Accumulates one epoch of client-side statistics.
struct EpochStats {
    double loss_sum = 0.0;
    std::size_t correct = 0;
    std::size_t seen = 0;
    std::size_t test_correct = 0;
    std::size_t test_seen = 0;

    void add_train(const nn::LossOutput& loss, const Tensor& logits, std::span<const std::uint8_t> labels) {
        loss_sum += static_cast<double>(loss.loss) * static_cast<double>(labels.size());
        correct += count_correct(logits, labels);
        seen += labels.size();
    }

    void fill(EpochReport& e) const {
        e.train_loss = seen ? loss_sum / static_cast<double>(seen) : kNaN;
        e.train_accuracy = seen ? static_cast<double>(correct) / static_cast<double>(seen) : kNaN;
        e.test_accuracy = test_seen ? static_cast<double>(test_correct) / static_cast<double>(test_seen) : kNaN;
    }
};

/// Client side of one forward exchange: activation out, server output back.
class RemoteHead {
public:
    RemoteHead(FrameChannel& ch, Mode mode, std::size_t classes) : ch_(ch), mode_(mode), classes_(classes) {}

    void enable_encryption(ckks::PrivateContext ctx, ckks::Prng noise) {
        he_.emplace(std::move(ctx));
        noise_.emplace(std::move(noise));
    }

    Tensor forward(const Tensor& act) {
        const std::size_t rows = act.dim(0);
        if (mode_ == Mode::plaintext) {
            ch_.send(Tag::activation_plain, encode_tensor(act));
            Tensor logits = decode_tensor(ch_.expect(Tag::server_out_plain).payload);
            require_shape(logits, {rows, classes_}, "server output");
            return logits;
        }
        const std::vector<double> values(act.data().begin(), act.data().end());
        ch_.send(Tag::activation_enc, ckks::serialize(ckks::encrypt_vector(*he_, values, *noise_)));
        const auto ev = ckks::deserialize_encrypted_vector(ch_.expect(Tag::server_out_enc).payload, *he_);
        if (ev.length != rows * classes_) {
            throw ProtocolError("encrypted server output holds " + std::to_string(ev.length) + " values, expected " +
                                std::to_string(rows * classes_));
        }
        const std::vector<double> out = ckks::decrypt_vector(*he_, ev);
        Tensor logits({rows, classes_});
        for (std::size_t i = 0; i < out.size(); ++i) logits[i] = static_cast<float>(out[i]);
        return logits;
    }

private:
    FrameChannel& ch_;
    Mode mode_;
    std::size_t classes_;
    std::optional<ckks::PrivateContext> he_;
    std::optional<ckks::Prng> noise_;
};

std::uint64_t os_seed() {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

void finish(RunReport& rep, const FrameChannel& ch, std::size_t keys_before, Clock::time_point t0) {
    rep.sent_tags = ch.sent_tags();
    rep.received_tags = ch.received_tags();
    rep.secret_keys_constructed = ckks::secret_key_constructions() - keys_before;
    rep.seconds = seconds_since(t0);
}

}  // namespace

std::string mode_name(Mode m) { return m == Mode::plaintext ? "plain" : "enc"; }

void TrainConfig::validate() const {
    if (batch_size == 0) throw std::invalid_argument("batch size must be at least 1");
    if (!std::isfinite(learning_rate) || learning_rate < 0.0) {
        throw std::invalid_argument("learning rate must be finite and non-negative");
    }
    if (mode != Mode::plaintext && mode != Mode::encrypted) throw std::invalid_argument("unknown mode");
}

Bytes encode_config(const TrainConfig& cfg) {
    Bytes out;
    out.reserve(kSyncConfigSize);
    ByteWriter w(out);
    w.put<double>(cfg.learning_rate);
    w.put<std::uint32_t>(cfg.batch_size);
    w.put<std::uint32_t>(cfg.num_batches);
    w.put<std::uint32_t>(cfg.epochs);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(cfg.mode));
    w.put<std::uint64_t>(cfg.seed);
    return out;
}

TrainConfig decode_config(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes, "SyncConfig");
    TrainConfig cfg;
    cfg.learning_rate = r.get<double>();
    cfg.batch_size = r.get<std::uint32_t>();
    cfg.num_batches = r.get<std::uint32_t>();
    cfg.epochs = r.get<std::uint32_t>();
    const auto mode = r.get<std::uint8_t>();
    if (mode > 1) r.fail("unknown mode " + std::to_string(mode));
    cfg.mode = static_cast<Mode>(mode);
    cfg.seed = r.get<std::uint64_t>();
    r.expect_done();
    return cfg;
}

std::uint64_t RunReport::total_bytes_client() const {
    std::uint64_t total = setup_bytes_client + teardown_bytes_client;
    for (const auto& e : epochs) total += e.bytes_sent_client;
    return total;
}

std::uint64_t RunReport::total_bytes_server() const {
    std::uint64_t total = setup_bytes_server + teardown_bytes_server;
    for (const auto& e : epochs) total += e.bytes_sent_server;
    return total;
}

std::uint32_t batches_per_epoch(const TrainConfig& cfg, std::size_t train_size) {
    if (cfg.batch_size == 0) throw std::invalid_argument("batch size must be at least 1");
    const std::size_t all = (train_size + cfg.batch_size - 1) / cfg.batch_size;
    if (cfg.num_batches > all) {
        throw std::invalid_argument("requested " + std::to_string(cfg.num_batches) + " batches but the training set has " +
                                    std::to_string(all));
    }
    return cfg.num_batches == 0 ? static_cast<std::uint32_t>(all) : cfg.num_batches;
}

RunReport run_client(ByteStream& stream, TrainConfig cfg, const ClientOptions& opts,
                     const data::EcgDataset& train, const data::EcgDataset& test, nn::ClientModel* final_model) {
    RunReport rep;
    rep.mode = cfg.mode;
    const std::size_t keys_before = ckks::secret_key_constructions();
    const auto t0 = Clock::now();
    FrameChannel ch(stream, opts.timeout);
    try {
        cfg.num_batches = batches_per_epoch(cfg, train.size());
        cfg.validate();
        if (cfg.mode == Mode::encrypted && !opts.he_params) {
            throw std::invalid_argument("encrypted mode needs CKKS parameters");
        }
        ch.send(Tag::sync_config, encode_config(cfg));
        if (decode_config(ch.expect(Tag::sync_ack).payload) != cfg) {
            throw ProtocolError("SyncAck does not echo the proposed configuration");
        }

        nn::SplitModel model = nn::initialize(opts.arch, {cfg.seed});
        nn::ClientModel& cm = model.client;
        nn::Adam adam;
        RemoteHead head(ch, cfg.mode, opts.arch.classes);
        if (cfg.mode == Mode::encrypted) {
            ckks::PrivateContext ctx = ckks::keygen(*opts.he_params, opts.key_seed.value_or(os_seed()));
            ch.send(Tag::public_context, ckks::serialize(ckks::to_public(ctx)));
            head.enable_encryption(std::move(ctx), opts.noise_seed ? ckks::Prng(*opts.noise_seed) : ckks::Prng());
        }
        rep.setup_bytes_client = ch.bytes_sent();
        rep.setup_bytes_server = ch.bytes_received();

        const auto lr = static_cast<float>(cfg.learning_rate);
        const auto test_batches = data::batch_indices(test.size(), cfg.batch_size, 0, false);
        for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
            const auto e0 = Clock::now();
            const auto sent0 = ch.bytes_sent(), recv0 = ch.bytes_received();
            EpochStats stats;
            for (const auto& idx : epoch_batches(cfg, train.size(), epoch, opts.shuffle)) {
                const Tensor x = train.gather_signals(idx);
                const auto y = train.gather_labels(idx);
                const Tensor act = cm.forward(x);
                const Tensor logits = head.forward(act);
                const nn::LossOutput loss = nn::softmax_cross_entropy(logits, y);
                ch.send(Tag::grad_output, encode_tensor(loss.grad_logits));
                if (cfg.mode == Mode::encrypted) {
                    ch.send(Tag::grad_weight, encode_tensor(matmul_tn(act, loss.grad_logits)));
                }
                const Tensor g = decode_tensor(ch.expect(Tag::grad_split).payload);
                require_shape(g, act.shape(), "dJ/da(l)");
                nn::apply_adam(cm, cm.backward(g), adam, lr);
                rep.step_losses.push_back(loss.loss);
                stats.add_train(loss, logits, y);
            }
            ch.send(Tag::epoch_done, encode_u32(static_cast<std::uint32_t>(test_batches.size())));
            rep.test_predictions.clear();
            for (const auto& idx : test_batches) {
                const Tensor logits = head.forward(cm.infer(test.gather_signals(idx)));
                const auto pred = argmax_rows(logits);
                rep.test_predictions.insert(rep.test_predictions.end(), pred.begin(), pred.end());
                stats.test_correct += count_correct(logits, test.gather_labels(idx));
                stats.test_seen += idx.size();
            }
            EpochReport e;
            e.epoch = epoch;
            stats.fill(e);
            e.seconds = seconds_since(e0);
            e.bytes_sent_client = ch.bytes_sent() - sent0;
            e.bytes_sent_server = ch.bytes_received() - recv0;
            rep.epochs.push_back(e);
        }

        const auto sent0 = ch.bytes_sent(), recv0 = ch.bytes_received();
        ch.send(Tag::training_done, {});
        ch.expect(Tag::training_done);
        rep.teardown_bytes_client = ch.bytes_sent() - sent0;
        rep.teardown_bytes_server = ch.bytes_received() - recv0;
        if (final_model) *final_model = std::move(cm);
    } catch (const std::exception& e) {
        rep.error = e.what();
        ch.send_error(e.what());
    }
    ch.close();
    finish(rep, ch, keys_before, t0);
    return rep;
}

RunReport run_server(ByteStream& stream, const ServerOptions& opts) {
    RunReport rep;
    const std::size_t keys_before = ckks::secret_key_constructions();
    const auto t0 = Clock::now();
    FrameChannel ch(stream, opts.timeout);
    try {
        TrainConfig cfg = decode_config(ch.expect(Tag::sync_config).payload);
        rep.mode = cfg.mode;
        TrainConfig want = opts.expected;
        if (want.num_batches == 0) want.num_batches = cfg.num_batches;
        if (cfg != want) {
            throw ProtocolError("configuration mismatch: client proposed lr=" + std::to_string(cfg.learning_rate) +
                                " n=" + std::to_string(cfg.batch_size) + " N=" + std::to_string(cfg.num_batches) +
                                " E=" + std::to_string(cfg.epochs) + " mode=" + mode_name(cfg.mode) +
                                " seed=" + std::to_string(cfg.seed) + "; server expects lr=" +
                                std::to_string(want.learning_rate) + " n=" + std::to_string(want.batch_size) +
                                " N=" + std::to_string(want.num_batches) + " E=" + std::to_string(want.epochs) +
                                " mode=" + mode_name(want.mode) + " seed=" + std::to_string(want.seed));
        }
        cfg.validate();
        ch.send(Tag::sync_ack, encode_config(cfg));

        std::optional<ckks::PublicContext> pub;
        if (cfg.mode == Mode::encrypted) {
            pub.emplace(ckks::deserialize_public_context(ch.expect(Tag::public_context).payload));
            if (opts.he_params && pub->params() != *opts.he_params) {
                throw ProtocolError("public context uses other CKKS parameters than this server");
            }
        }
        rep.setup_bytes_client = ch.bytes_received();
        rep.setup_bytes_server = ch.bytes_sent();

        nn::ServerModel sm = nn::initialize(opts.arch, {cfg.seed}).server;
        const std::size_t width = opts.arch.split_width();
        const std::size_t classes = opts.arch.classes;
        const auto lr = static_cast<float>(cfg.learning_rate);

        auto rows_of = [&](std::size_t values) {
            const std::size_t rows = values / width;
            if (values % width != 0 || rows == 0 || rows > cfg.batch_size) {
                throw ProtocolError("activation with " + std::to_string(values) + " values is not 1.." +
                                    std::to_string(cfg.batch_size) + " rows of " + std::to_string(width));
            }
            return rows;
        };
        auto read_plain = [&] {
            Tensor a = decode_tensor(ch.expect(Tag::activation_plain).payload);
            require_shape(a, {rows_of(a.size()), width}, "activation");
            return a;
        };
        auto read_enc = [&] {
            auto ev = ckks::deserialize_encrypted_vector(ch.expect(Tag::activation_enc).payload, *pub);
            if (ev.layout != ckks::Layout::slots) throw ProtocolError("encrypted activation must use slot layout");
            return std::pair{rows_of(ev.length), std::move(ev)};
        };

        for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
            const auto e0 = Clock::now();
            const auto sent0 = ch.bytes_sent(), recv0 = ch.bytes_received();
            for (std::size_t b = 0; b < cfg.num_batches; ++b) {
                std::size_t rows = 0;
                if (cfg.mode == Mode::plaintext) {
                    const Tensor a = read_plain();
                    rows = a.dim(0);
                    ch.send(Tag::server_out_plain, encode_tensor(sm.forward(a)));
                } else {
                    auto [r, ev] = read_enc();
                    rows = r;
                    ch.send(Tag::server_out_enc,
                            ckks::serialize(ckks::vec_matmul_plain(*pub, ev, sm.linear.weight, sm.linear.bias)));
                }
                const Tensor g = decode_tensor(ch.expect(Tag::grad_output).payload);
                require_shape(g, {rows, classes}, "dJ/da(L)");
                nn::ServerStep step;
                if (cfg.mode == Mode::plaintext) {
                    step = sm.backward_and_update(g, lr, opts.split_grad);
                } else {
                    const Tensor gw = decode_tensor(ch.expect(Tag::grad_weight).payload);
                    require_shape(gw, {width, classes}, "dJ/dw(L)");
                    step = sm.apply_client_gradients(g, gw, lr, opts.split_grad);
                }
                ch.send(Tag::grad_split, encode_tensor(step.grad_split));
            }
            const std::uint32_t evals = decode_u32(ch.expect(Tag::epoch_done).payload);
            for (std::uint32_t b = 0; b < evals; ++b) {
                if (cfg.mode == Mode::plaintext) {
                    ch.send(Tag::server_out_plain, encode_tensor(nn::linear_forward(sm.linear, read_plain())));
                } else {
                    auto [rows, ev] = read_enc();
                    ch.send(Tag::server_out_enc,
                            ckks::serialize(ckks::vec_matmul_plain(*pub, ev, sm.linear.weight, sm.linear.bias)));
                }
            }
            EpochReport e{epoch, kNaN, kNaN, kNaN, seconds_since(e0), ch.bytes_received() - recv0,
                          ch.bytes_sent() - sent0};
            rep.epochs.push_back(e);
        }

        const auto sent0 = ch.bytes_sent(), recv0 = ch.bytes_received();
        ch.expect(Tag::training_done);
        ch.send(Tag::training_done, {});
        rep.teardown_bytes_client = ch.bytes_received() - recv0;
        rep.teardown_bytes_server = ch.bytes_sent() - sent0;
        ch.expect_end();
    } catch (const std::exception& e) {
        rep.error = e.what();
        ch.send_error(e.what());
    }
    ch.close();
    finish(rep, ch, keys_before, t0);
    return rep;
}

RunReport train_local(TrainConfig cfg, const LocalOptions& opts, const data::EcgDataset& train,
                      const data::EcgDataset& test, nn::SplitModel* final_model) {
    cfg.num_batches = batches_per_epoch(cfg, train.size());
    cfg.validate();
    RunReport rep;
    const auto t0 = Clock::now();
    nn::SplitModel model = nn::initialize(opts.arch, {cfg.seed});
    nn::Adam adam;
    const auto lr = static_cast<float>(cfg.learning_rate);
    const auto test_batches = data::batch_indices(test.size(), cfg.batch_size, 0, false);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto e0 = Clock::now();
        EpochStats stats;
        for (const auto& idx : epoch_batches(cfg, train.size(), epoch, opts.shuffle)) {
            const auto y = train.gather_labels(idx);
            const Tensor act = model.client.forward(train.gather_signals(idx));
            const Tensor logits = model.server.forward(act);
            const nn::LossOutput loss = nn::softmax_cross_entropy(logits, y);
            const nn::ServerStep step = model.server.backward_and_update(loss.grad_logits, lr, opts.split_grad);
            nn::apply_adam(model.client, model.client.backward(step.grad_split), adam, lr);
            rep.step_losses.push_back(loss.loss);
            stats.add_train(loss, logits, y);
        }
        rep.test_predictions.clear();
        for (const auto& idx : test_batches) {
            const Tensor logits = nn::linear_forward(model.server.linear, model.client.infer(test.gather_signals(idx)));
            const auto pred = argmax_rows(logits);
            rep.test_predictions.insert(rep.test_predictions.end(), pred.begin(), pred.end());
            stats.test_correct += count_correct(logits, test.gather_labels(idx));
            stats.test_seen += idx.size();
        }
        EpochReport e;
        e.epoch = epoch;
        stats.fill(e);
        e.seconds = seconds_since(e0);
        rep.epochs.push_back(e);
    }
    rep.seconds = seconds_since(t0);
    if (final_model) *final_model = std::move(model);
    return rep;
}

}  // namespace hesplit::proto
