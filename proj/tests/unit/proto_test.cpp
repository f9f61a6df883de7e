#include <gtest/gtest.h>

#include <future>
#include <random>
#include <thread>

#include "hesplit/ckks/serialize.hpp"
#include "hesplit/proto/frame.hpp"
#include "hesplit/proto/training.hpp"
#include "support/fuzz.hpp"

using namespace hesplit;
using namespace hesplit::proto;
using namespace std::chrono_literals;

namespace {

struct Pair {
    RunReport client;
    RunReport server;
};

Pair run_pair(const fuzz::Session& s, nn::ClientModel* trained = nullptr) {
    auto [a, b] = make_pipe();
    Pair out;
    std::thread server([&] { out.server = run_server(*b, s.server); });
    out.client = run_client(*a, s.cfg, s.client, s.train, s.test, trained);
    server.join();
    return out;
}

fuzz::Session session(Mode mode, std::size_t train, std::size_t test, std::uint32_t n, std::uint32_t epochs) {
    fuzz::Session s = fuzz::small_session(mode);
    s.cfg.batch_size = n;
    s.cfg.epochs = epochs;
    s.train = data::synth(train, 21, std::min<std::size_t>(train, 5));
    s.test = data::synth(test, 22, std::min<std::size_t>(test, 5));
    s.client.timeout = s.server.timeout = 20s;
    s.server.expected = s.cfg;
    return s;
}

std::vector<std::uint8_t> tags(std::initializer_list<Tag> list) {
    std::vector<std::uint8_t> out;
    for (Tag t : list) out.push_back(static_cast<std::uint8_t>(t));
    return out;
}

// Frame bytes of a plain tensor message.
std::uint64_t tensor_frame(std::size_t rows, std::size_t cols) { return 9 + 1 + 16 + 4 * rows * cols; }

std::vector<std::size_t> batch_sizes(std::size_t count, std::size_t n) {
    std::vector<std::size_t> out;
    for (std::size_t b = 0; b < count; b += n) out.push_back(std::min(n, count - b));
    return out;
}

}  // namespace

TEST(SyncConfig, EncodesToTwentyNineBytes) {
    TrainConfig cfg{0.001, 4, 4817, 10, Mode::encrypted, 0x0102030405060708ULL};
    const Bytes b = encode_config(cfg);
    ASSERT_EQ(b.size(), kSyncConfigSize);
    EXPECT_EQ(b[8], 4);      // n, after the f64 learning rate
    EXPECT_EQ(b[20], 1);     // mode
    EXPECT_EQ(b[21], 0x08);  // seed, little-endian
    EXPECT_EQ(decode_config(b), cfg);
    EXPECT_THROW(decode_config(std::span(b).first(28)), DecodeError);
    Bytes bad = b;
    bad[20] = 2;
    EXPECT_THROW(decode_config(bad), DecodeError);
}

TEST(Frames, TensorPayloadRoundtrip) {
    Tensor t({2, 3}, {1, -2, 3.5f, 0, 1e-7f, -1e7f});
    const Bytes b = encode_tensor(t);
    EXPECT_EQ(b.size(), tensor_payload_size(t.shape()));
    EXPECT_EQ(b.size(), 1u + 16u + 24u);
    EXPECT_EQ(decode_tensor(b), t);
    EXPECT_THROW(decode_tensor(std::span(b).first(b.size() - 1)), DecodeError);
    Bytes wide = b;
    wide[1] = 0xff;
    EXPECT_THROW(decode_tensor(wide), DecodeError);
    EXPECT_THROW(decode_tensor(Bytes{0}), DecodeError);
}

TEST(Frames, CountersAndTags) {
    auto [a, b] = make_pipe();
    FrameChannel x(*a, 1s), y(*b, 1s);
    const Bytes payload{1, 2, 3};
    x.send(Tag::epoch_done, payload);
    x.send(Tag::training_done, {});
    const Frame f = y.expect(Tag::epoch_done);
    EXPECT_EQ(f.payload, payload);
    y.expect(Tag::training_done);
    EXPECT_EQ(x.bytes_sent(), 9u + 3u + 9u);
    EXPECT_EQ(y.bytes_received(), x.bytes_sent());
    EXPECT_EQ(x.sent_tags(), (std::vector<Tag>{Tag::epoch_done, Tag::training_done}));
}

TEST(Frames, RejectsUnknownTagWrongTagAndTimeout) {
    auto [a, b] = make_pipe();
    FrameChannel y(*b, 200ms);
    const Bytes raw{0, 0, 0, 0, 0, 0, 0, 0, 0x42};
    a->write(raw);
    EXPECT_THROW(y.receive(), ProtocolError);

    FrameChannel x(*a, 200ms);
    x.send(Tag::grad_output, {});
    EXPECT_THROW(y.expect(Tag::activation_plain), ProtocolError);
    x.send_error("stop");
    EXPECT_THROW(y.expect(Tag::activation_plain), PeerAborted);
    EXPECT_THROW(y.receive(), TimeoutError);
    a->close();
    EXPECT_THROW(y.receive(), TransportError);
}

TEST(Frames, RejectsOversizedLength) {
    auto [a, b] = make_pipe();
    FrameChannel y(*b, 200ms);
    const Bytes raw{0, 0, 0, 0, 0, 1, 0, 0, 0x10};
    a->write(raw);
    EXPECT_THROW(y.receive(), ProtocolError);
}

TEST(Endpoint, Parse) {
    const Endpoint e = Endpoint::parse("127.0.0.1:7000");
    EXPECT_EQ(e.host, "127.0.0.1");
    EXPECT_EQ(e.port, 7000);
    EXPECT_THROW(Endpoint::parse("localhost"), std::invalid_argument);
    EXPECT_THROW(Endpoint::parse("h:70000"), std::invalid_argument);
    EXPECT_THROW(Endpoint::parse("h:7x"), std::invalid_argument);
}

TEST(Sync, AgreedConfigurationIsAcceptedBothSides) {
    fuzz::Session s = session(Mode::plaintext, 4, 4, 4, 1);
    s.cfg.learning_rate = 0.001;
    s.server.expected = s.cfg;
    s.server.expected.epochs = s.cfg.epochs = 0;
    const Pair p = run_pair(s);
    EXPECT_TRUE(p.client.ok()) << p.client.error;
    EXPECT_TRUE(p.server.ok()) << p.server.error;
    // E = 0: nothing but the handshake.
    EXPECT_TRUE(p.client.epochs.empty());
    EXPECT_EQ(p.client.sent_tags, (std::vector<Tag>{Tag::sync_config, Tag::training_done}));
    EXPECT_EQ(p.server.sent_tags, (std::vector<Tag>{Tag::sync_ack, Tag::training_done}));
}

TEST(Sync, MismatchAbortsWithErrorFrame) {
    fuzz::Session s = session(Mode::plaintext, 8, 4, 4, 1);
    s.server.expected.batch_size = 8;
    const Pair p = run_pair(s);
    EXPECT_FALSE(p.client.ok());
    EXPECT_FALSE(p.server.ok());
    EXPECT_NE(p.server.error.find("mismatch"), std::string::npos) << p.server.error;
    EXPECT_EQ(p.server.sent_tags, (std::vector<Tag>{Tag::error}));
    EXPECT_NE(p.client.error.find("peer aborted"), std::string::npos) << p.client.error;
}

TEST(Sync, ReplayedConfigAfterAckIsAStateError) {
    auto [a, b] = make_pipe();
    fuzz::Session s = session(Mode::plaintext, 8, 4, 4, 1);
    s.server.expected.num_batches = 2;
    RunReport server;
    std::thread t([&] { server = run_server(*b, s.server); });
    FrameChannel ch(*a, 5s);
    TrainConfig cfg = s.cfg;
    cfg.num_batches = 2;
    ch.send(Tag::sync_config, encode_config(cfg));
    EXPECT_EQ(decode_config(ch.expect(Tag::sync_ack).payload), cfg);
    ch.send(Tag::sync_config, encode_config(cfg));
    EXPECT_THROW(ch.expect(Tag::server_out_plain), PeerAborted);
    t.join();
    EXPECT_FALSE(server.ok());
    EXPECT_NE(server.error.find("expected ActivationPlain, got SyncConfig"), std::string::npos) << server.error;
}

TEST(Sync, GradientBeforeActivationAborts) {
    auto [a, b] = make_pipe();
    fuzz::Session s = session(Mode::plaintext, 8, 4, 4, 1);
    RunReport server;
    std::thread t([&] { server = run_server(*b, s.server); });
    FrameChannel ch(*a, 5s);
    TrainConfig cfg = s.cfg;
    cfg.num_batches = 2;
    ch.send(Tag::sync_config, encode_config(cfg));
    ch.expect(Tag::sync_ack);
    ch.send(Tag::grad_output, encode_tensor(Tensor::zeros({4, 5})));
    EXPECT_THROW(ch.expect(Tag::server_out_plain), PeerAborted);
    t.join();
    EXPECT_FALSE(server.ok());
}

TEST(PlainSession, FrameCycleAndCounts) {
    // 10 samples in batches of 4 -> 3 cycles, 2 evaluation batches, 2 epochs.
    fuzz::Session s = session(Mode::plaintext, 10, 6, 4, 2);
    const fuzz::Outcome o = fuzz::run_case(s, {.enabled = false});
    ASSERT_TRUE(o.client.ok()) << o.client.error;
    ASSERT_TRUE(o.server.ok()) << o.server.error;
    std::vector<std::uint8_t> expect = tags({Tag::sync_config, Tag::sync_ack});
    for (int e = 0; e < 2; ++e) {
        for (int b = 0; b < 3; ++b) {
            for (auto t : tags({Tag::activation_plain, Tag::server_out_plain, Tag::grad_output, Tag::grad_split})) {
                expect.push_back(t);
            }
        }
        expect.push_back(static_cast<std::uint8_t>(Tag::epoch_done));
        for (int b = 0; b < 2; ++b) {
            for (auto t : tags({Tag::activation_plain, Tag::server_out_plain})) expect.push_back(t);
        }
    }
    for (auto t : tags({Tag::training_done, Tag::training_done})) expect.push_back(t);
    EXPECT_EQ(o.transcript, expect);
    EXPECT_EQ(o.client.step_losses.size(), 6u);
    EXPECT_EQ(o.client.test_predictions.size(), 6u);
    ASSERT_EQ(o.client.epochs.size(), 2u);
    EXPECT_EQ(o.server.epochs.size(), 2u);
}

TEST(PlainSession, ByteCountsMatchClosedForm) {
    fuzz::Session s = session(Mode::plaintext, 10, 6, 4, 2);
    const Pair p = run_pair(s);
    ASSERT_TRUE(p.client.ok()) << p.client.error;
    const std::size_t w = 2000, k = 5;
    std::uint64_t client = 0, server = 0;
    for (std::size_t b : batch_sizes(10, 4)) {
        client += tensor_frame(b, w) + tensor_frame(b, k);
        server += tensor_frame(b, k) + tensor_frame(b, w);
    }
    client += 9 + 4;  // EpochDone
    for (std::size_t b : batch_sizes(6, 4)) {
        client += tensor_frame(b, w);
        server += tensor_frame(b, k);
    }
    for (const RunReport* r : {&p.client, &p.server}) {
        EXPECT_EQ(r->setup_bytes_client, 9u + kSyncConfigSize);
        EXPECT_EQ(r->setup_bytes_server, 9u + kSyncConfigSize);
        ASSERT_EQ(r->epochs.size(), 2u);
        for (const auto& e : r->epochs) {
            EXPECT_EQ(e.bytes_sent_client, client);
            EXPECT_EQ(e.bytes_sent_server, server);
        }
        EXPECT_EQ(r->teardown_bytes_client, 9u);
        EXPECT_EQ(r->teardown_bytes_server, 9u);
    }
    EXPECT_EQ(p.client.total_bytes_client(), 9 + 29 + 2 * client + 9);
    EXPECT_EQ(p.client.total_bytes_server(), p.server.total_bytes_server());
    EXPECT_EQ(p.client.total_bytes_client(), p.server.total_bytes_client());
}

TEST(PlainSession, ZeroLearningRateKeepsInitialWeights) {
    fuzz::Session s = session(Mode::plaintext, 8, 2, 4, 1);
    s.cfg.learning_rate = s.server.expected.learning_rate = 0.0;
    nn::ClientModel trained;
    const Pair p = run_pair(s, &trained);
    ASSERT_TRUE(p.client.ok()) << p.client.error;
    const nn::SplitModel init = nn::initialize({}, {s.cfg.seed});
    EXPECT_EQ(trained.conv1.weight, init.client.conv1.weight);
    EXPECT_EQ(trained.conv2.bias, init.client.conv2.bias);
    ASSERT_EQ(p.client.step_losses.size(), 2u);
}

TEST(PlainSession, EqualsLocalTraining) {
    fuzz::Session s = session(Mode::plaintext, 40, 12, 4, 2);
    const Pair p = run_pair(s);
    ASSERT_TRUE(p.client.ok()) << p.client.error;
    const RunReport local = train_local(s.cfg, {}, s.train, s.test);
    ASSERT_EQ(local.step_losses.size(), 20u);
    EXPECT_EQ(p.client.step_losses, local.step_losses);
    EXPECT_EQ(p.client.test_predictions, local.test_predictions);
    for (std::size_t e = 0; e < 2; ++e) {
        EXPECT_EQ(p.client.epochs[e].train_loss, local.epochs[e].train_loss);
        EXPECT_EQ(p.client.epochs[e].test_accuracy, local.epochs[e].test_accuracy);
    }
}

TEST(PlainSession, PostUpdateFlagMatchesLocalWithSameFlag) {
    fuzz::Session s = session(Mode::plaintext, 16, 4, 4, 1);
    s.cfg.learning_rate = s.server.expected.learning_rate = 0.05;
    s.server.split_grad = nn::SplitGradWeights::post_update;
    const Pair p = run_pair(s);
    ASSERT_TRUE(p.client.ok()) << p.client.error;
    LocalOptions post;
    post.split_grad = nn::SplitGradWeights::post_update;
    EXPECT_EQ(p.client.step_losses, train_local(s.cfg, post, s.train, s.test).step_losses);
    EXPECT_NE(p.client.step_losses, train_local(s.cfg, {}, s.train, s.test).step_losses);
}

TEST(PlainSession, OverTcpMatchesPipe) {
    fuzz::Session s = session(Mode::plaintext, 8, 4, 4, 1);
    TcpListener listener({"127.0.0.1", 0});
    RunReport server;
    std::thread t([&] {
        auto stream = listener.accept(10s);
        server = run_server(*stream, s.server);
    });
    auto stream = tcp_connect({"127.0.0.1", listener.port()}, 10s);
    const RunReport client = run_client(*stream, s.cfg, s.client, s.train, s.test);
    t.join();
    ASSERT_TRUE(client.ok()) << client.error;
    ASSERT_TRUE(server.ok()) << server.error;
    const Pair piped = run_pair(s);
    EXPECT_EQ(client.step_losses, piped.client.step_losses);
    EXPECT_EQ(client.total_bytes_client(), piped.client.total_bytes_client());
    EXPECT_EQ(server.total_bytes_server(), piped.server.total_bytes_server());
}

TEST(PlainSession, PeerDisconnectGivesPartialReport) {
    fuzz::Session s = session(Mode::plaintext, 8, 4, 4, 3);
    auto [a, b] = make_pipe();
    std::thread server([&] {
        FrameChannel ch(*b, 5s);
        TrainConfig cfg = decode_config(ch.expect(Tag::sync_config).payload);
        ch.send(Tag::sync_ack, encode_config(cfg));
        nn::ServerModel sm = nn::initialize({}, {cfg.seed}).server;
        // Serve one epoch properly, then vanish.
        for (int i = 0; i < 2; ++i) {
            ch.send(Tag::server_out_plain, encode_tensor(sm.forward(decode_tensor(ch.expect(Tag::activation_plain).payload))));
            ch.send(Tag::grad_split, encode_tensor(sm.backward_and_update(decode_tensor(ch.expect(Tag::grad_output).payload), 0.001f).grad_split));
        }
        ch.expect(Tag::epoch_done);
        ch.send(Tag::server_out_plain, encode_tensor(nn::linear_forward(sm.linear, decode_tensor(ch.expect(Tag::activation_plain).payload))));
        ch.expect(Tag::activation_plain);
        ch.close();
    });
    const RunReport r = run_client(*a, s.cfg, s.client, s.train, s.test);
    server.join();
    EXPECT_FALSE(r.ok());
    EXPECT_EQ(r.epochs.size(), 1u);
    EXPECT_EQ(r.step_losses.size(), 2u);
}

TEST(EncryptedSession, FrameCycleAccountingAndKeyConfinement) {
    // 64 samples, one full epoch, evaluation on 8.
    fuzz::Session s = session(Mode::encrypted, 64, 8, 4, 1);
    s.client.he_params = s.server.he_params = ckks::preset("p4096b");
    const fuzz::Outcome o = fuzz::run_case(s, {.enabled = false});
    ASSERT_TRUE(o.client.ok()) << o.client.error;
    ASSERT_TRUE(o.server.ok()) << o.server.error;

    std::vector<std::uint8_t> expect = tags({Tag::sync_config, Tag::sync_ack, Tag::public_context});
    for (int b = 0; b < 16; ++b) {
        for (auto t : tags({Tag::activation_enc, Tag::server_out_enc, Tag::grad_output, Tag::grad_weight, Tag::grad_split})) {
            expect.push_back(t);
        }
    }
    expect.push_back(static_cast<std::uint8_t>(Tag::epoch_done));
    for (int b = 0; b < 2; ++b) {
        for (auto t : tags({Tag::activation_enc, Tag::server_out_enc})) expect.push_back(t);
    }
    for (auto t : tags({Tag::training_done, Tag::training_done})) expect.push_back(t);
    EXPECT_EQ(o.transcript, expect);

    // Key confinement: no secret key on the server thread, no plaintext output.
    EXPECT_EQ(o.server.secret_keys_constructed, 0u);
    EXPECT_GT(o.client.secret_keys_constructed, 0u);
    for (Tag t : o.server.sent_tags) EXPECT_NE(t, Tag::server_out_plain);

    // Accounting oracle from the serialized sizes: 4 rows of 2000 values fill
    // 8000 / 2048 -> 4 ciphertexts at the top level; the reply is one
    // ciphertext one level lower.
    const ckks::CkksParams hp = ckks::preset("p4096b");
    const std::size_t top = hp.data_prime_count() - 1;
    const std::uint64_t ev_header = 1 + 1 + 8 + 8 + 4;
    const std::uint64_t act = 9 + ev_header + 4 * ckks::ciphertext_bytes(4096, top);
    const std::uint64_t out = 9 + ev_header + ckks::ciphertext_bytes(4096, top - 1);
    const std::uint64_t client_epoch = 16 * (act + tensor_frame(4, 5) + tensor_frame(2000, 5)) + 13 + 2 * act;
    const std::uint64_t server_epoch = 16 * (out + tensor_frame(4, 2000)) + 2 * out;
    EXPECT_EQ(o.client.epochs.at(0).bytes_sent_client, client_epoch);
    EXPECT_EQ(o.client.epochs.at(0).bytes_sent_server, server_epoch);
    EXPECT_EQ(o.server.epochs.at(0).bytes_sent_client, client_epoch);
    EXPECT_EQ(o.server.epochs.at(0).bytes_sent_server, server_epoch);
    const ckks::PrivateContext ctx = ckks::keygen(hp, 1);
    EXPECT_EQ(o.client.setup_bytes_client, 9 + 29 + 9 + ckks::serialize(ckks::to_public(ctx)).size());
    EXPECT_EQ(o.client.total_bytes_client(), o.server.total_bytes_client());
    EXPECT_EQ(o.client.total_bytes_server(), o.server.total_bytes_server());
}

TEST(EncryptedSession, FirstStepLossTracksPlaintext) {
    fuzz::Session enc = session(Mode::encrypted, 4, 4, 4, 1);
    enc.client.he_params = enc.server.he_params = ckks::preset("p8192a");
    fuzz::Session plain = session(Mode::plaintext, 4, 4, 4, 1);
    const Pair e = run_pair(enc), p = run_pair(plain);
    ASSERT_TRUE(e.client.ok()) << e.client.error;
    ASSERT_TRUE(p.client.ok()) << p.client.error;
    ASSERT_EQ(e.client.step_losses.size(), 1u);
    const double a = e.client.step_losses[0], b = p.client.step_losses[0];
    EXPECT_LT(std::abs(a - b) / std::abs(b), 1e-2);
    EXPECT_NE(a, b);  // fresh noise really is there
}

TEST(EncryptedSession, ZeroLearningRateRepeatsOutputWithinNoise) {
    fuzz::Session s = session(Mode::encrypted, 4, 4, 4, 1);
    const std::vector<std::size_t> same(12, 3);
    s.train = s.train.subset(same);
    s.cfg.learning_rate = s.server.expected.learning_rate = 0.0;
    s.client.he_params = s.server.he_params = ckks::preset("p4096b");
    const Pair p = run_pair(s);
    ASSERT_TRUE(p.client.ok()) << p.client.error;
    ASSERT_EQ(p.client.step_losses.size(), 3u);
    for (float l : p.client.step_losses) EXPECT_NEAR(l, p.client.step_losses[0], 1e-3);
}

TEST(EncryptedSession, ServerRejectsForeignParameters) {
    fuzz::Session s = session(Mode::encrypted, 4, 4, 4, 1);
    s.server.he_params = ckks::preset("p4096a");
    const Pair p = run_pair(s);
    EXPECT_FALSE(p.server.ok());
    EXPECT_FALSE(p.client.ok());
}

TEST(EncryptedSession, ClientNeedsParameters) {
    fuzz::Session s = session(Mode::encrypted, 4, 4, 4, 1);
    s.client.he_params.reset();
    const Pair p = run_pair(s);
    EXPECT_FALSE(p.client.ok());
    EXPECT_FALSE(p.server.ok());
}

TEST(LocalTraining, DeterministicAndRespectsBatchLimit) {
    const auto train = data::synth(20, 8), test = data::synth(8, 9);
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.num_batches = 3;
    const RunReport a = train_local(cfg, {}, train, test), b = train_local(cfg, {}, train, test);
    EXPECT_EQ(a.step_losses, b.step_losses);
    EXPECT_EQ(a.step_losses.size(), 6u);
    cfg.num_batches = 6;
    EXPECT_THROW(train_local(cfg, {}, train, test), std::invalid_argument);
}

TEST(Fuzz, EveryMutationAbortsCleanly) {
    std::mt19937_64 rng(2024);
    std::size_t applied = 0;
    for (Mode mode : {Mode::plaintext, Mode::encrypted}) {
        const fuzz::Session s = fuzz::small_session(mode);
        const fuzz::Outcome base = fuzz::run_case(s, {.enabled = false});
        ASSERT_TRUE(base.client.ok() && base.server.ok()) << base.client.error << base.server.error;
        const std::size_t cases = mode == Mode::plaintext ? 60 : 30;
        for (std::size_t i = 0; i < cases; ++i) {
            const auto m = static_cast<fuzz::Mutation>(i % 3);
            const std::size_t span = m == fuzz::Mutation::reorder ? base.frames - 4 : base.frames;
            const fuzz::Case c{m, rng() % span, rng()};
            const fuzz::Outcome o = fuzz::run_case(s, c);
            ASSERT_TRUE(o.applied) << fuzz::mutation_name(m) << " at " << c.target;
            ++applied;
            EXPECT_TRUE(fuzz::clean_abort(o, 2.5))
                << o.detail << ": client '" << o.client.error << "' server '" << o.server.error << "' errors "
                << o.endpoint_errors << " in " << o.seconds << "s";
        }
    }
    EXPECT_EQ(applied, 90u);
}

TEST(Fuzz, ForgedErrorOnEveryFrameFailsBothSides) {
    const fuzz::Session s = fuzz::small_session(Mode::plaintext);
    const std::size_t frames = fuzz::run_case(s, {.enabled = false}).frames;
    for (std::size_t target = 0; target < frames; ++target) {
        const fuzz::Outcome o = fuzz::run_case(s, {fuzz::Mutation::retag, target, 1, true, 0x7F});
        ASSERT_TRUE(o.applied);
        EXPECT_TRUE(fuzz::clean_abort(o, 2.5)) << o.detail << ": client '" << o.client.error << "' server '"
                                               << o.server.error << "'";
    }
}

TEST(EncryptedSession, LossDriftStaysSmallUnderP8192) {
    fuzz::Session enc = session(Mode::encrypted, 200, 4, 4, 1);
    enc.client.he_params = enc.server.he_params = ckks::preset("p8192a");
    const fuzz::Session plain = session(Mode::plaintext, 200, 4, 4, 1);
    const Pair e = run_pair(enc), p = run_pair(plain);
    ASSERT_TRUE(e.client.ok()) << e.client.error;
    ASSERT_EQ(e.client.step_losses.size(), 50u);
    for (std::size_t i = 0; i < 50; ++i) {
        const double a = e.client.step_losses[i], b = p.client.step_losses[i];
        EXPECT_LT(std::abs(a - b) / std::abs(b), 1e-2) << "step " << i;
    }
}
