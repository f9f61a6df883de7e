#pragma once

// Man-in-the-middle for a client/server session over in-process pipes. It
// forwards frames unchanged except for one, which it reorders, truncates or
// retags. Used to check that every corruption ends in a clean abort.

#include <atomic>
#include <mutex>
#include <random>
#include <thread>

#include "hesplit/proto/training.hpp"

namespace hesplit::fuzz {

using namespace std::chrono_literals;

enum class Mutation { reorder, truncate, retag };

inline const char* mutation_name(Mutation m) {
    switch (m) {
        case Mutation::reorder: return "reorder";
        case Mutation::truncate: return "truncate";
        case Mutation::retag: return "retag";
    }
    return "?";
}

struct Session {
    proto::TrainConfig cfg;
    proto::ClientOptions client;
    proto::ServerOptions server;
    data::EcgDataset train;
    data::EcgDataset test;
};

/// Small sessions: one-sample batches, two training steps and one
/// evaluation step per epoch, two epochs.
inline Session small_session(proto::Mode mode) {
    Session s;
    s.cfg.batch_size = 1;
    s.cfg.epochs = 2;
    s.cfg.mode = mode;
    s.cfg.seed = 5;
    s.train = data::synth(2, 3, 2);
    s.test = data::synth(1, 4, 1);
    s.client.timeout = s.server.timeout = 3s;
    s.server.expected = s.cfg;
    if (mode == proto::Mode::encrypted) {
        s.client.he_params = s.server.he_params = ckks::preset("p2048");
        s.client.key_seed = 17;
        s.client.noise_seed = 18;
    }
    return s;
}

struct Case {
    Mutation mutation = Mutation::retag;
    std::size_t target = 0;  ///< global frame index, both directions
    std::uint64_t seed = 0;
    bool enabled = true;
    int retag_to = -1;  ///< fixed replacement tag; random when negative
};

struct Outcome {
    proto::RunReport client;
    proto::RunReport server;
    bool applied = false;
    std::size_t frames = 0;
    std::size_t endpoint_errors = 0;  ///< Error frames sent by client or server
    std::vector<std::uint8_t> transcript;
    std::string detail;
    double seconds = 0.0;
};

class Proxy {
public:
    Proxy(const Case& c, proto::Mode mode, std::unique_ptr<proto::ByteStream> to_client,
          std::unique_ptr<proto::ByteStream> to_server)
        : case_(c), mode_(mode), rng_(c.seed), client_(std::move(to_client)), server_(std::move(to_server)) {}

    void run() {
        std::thread up([this] { pump(*client_, *server_, true); });
        pump(*server_, *client_, false);
        up.join();
    }

    bool applied() const { return applied_; }
    std::size_t frames() const { return counter_; }
    std::size_t endpoint_errors() const { return errors_; }
    const std::string& detail() const { return detail_; }
    /// Tags in global order as they left the endpoints.
    const std::vector<std::uint8_t>& transcript() const { return transcript_; }

private:
    struct Raw {
        std::uint64_t len = 0;
        std::uint8_t tag = 0;
        Bytes payload;
    };

    static bool read_frame(proto::ByteStream& s, Raw& f) {
        std::uint8_t h[proto::kFrameHeader];
        try {
            s.read_exact(h, 10s);
            f.len = 0;
            for (int i = 0; i < 8; ++i) f.len |= static_cast<std::uint64_t>(h[i]) << (8 * i);
            f.tag = h[8];
            f.payload.assign(f.len, 0);
            s.read_exact(f.payload, 10s);
            return true;
        } catch (const proto::TransportError&) {
            return false;
        }
    }

    static Bytes header(std::uint64_t len, std::uint8_t tag) {
        Bytes h(proto::kFrameHeader);
        for (int i = 0; i < 8; ++i) h[i] = static_cast<std::uint8_t>(len >> (8 * i));
        h[8] = tag;
        return h;
    }

    static void forward(proto::ByteStream& to, const Raw& f) {
        to.write(header(f.len, f.tag));
        to.write(f.payload);
    }

    // A frame the sender follows immediately with another one.
    bool swappable(std::uint8_t tag, bool upstream) const {
        using proto::Tag;
        if (!upstream) return false;
        const auto t = static_cast<Tag>(tag);
        return t == Tag::epoch_done || t == Tag::public_context ||
               (t == Tag::grad_output && mode_ == proto::Mode::encrypted);
    }

    void pump(proto::ByteStream& from, proto::ByteStream& to, bool upstream) {
        Raw f;
        try {
            while (read_frame(from, f)) {
                const std::size_t idx = counter_++;
                record(idx, f.tag);
                // Counted before mutation, so an injected Error does not count.
                if (f.tag == static_cast<std::uint8_t>(proto::Tag::error)) ++errors_;
                if (!claim(idx, f.tag, upstream)) {
                    forward(to, f);
                    continue;
                }
                if (!mutate(from, to, f, idx)) break;
            }
        } catch (const proto::TransportError&) {
        }
        to.close();
    }

    void record(std::size_t idx, std::uint8_t tag) {
        std::lock_guard lock(mu_);
        if (transcript_.size() <= idx) transcript_.resize(idx + 1);
        transcript_[idx] = tag;
    }

    bool claim(std::size_t idx, std::uint8_t tag, bool upstream) {
        std::lock_guard lock(mu_);
        if (!case_.enabled || applied_ || idx < case_.target) return false;
        if (case_.mutation == Mutation::reorder ? !swappable(tag, upstream) : idx != case_.target) return false;
        applied_ = true;
        return true;
    }

    // Returns false when the forward direction was cut.
    bool mutate(proto::ByteStream& from, proto::ByteStream& to, Raw& f, std::size_t idx) {
        detail_ = std::string(mutation_name(case_.mutation)) + " frame " + std::to_string(idx) + " (" +
                  proto::tag_name(f.tag) + ")";
        switch (case_.mutation) {
            case Mutation::retag: {
                static constexpr std::uint8_t tags[] = {0x00, 0x01, 0x02, 0x03, 0x10, 0x11, 0x20, 0x21, 0x30,
                                                        0x31, 0x40, 0x50, 0x5F, 0x7F, 0x99, 0xFF};
                std::uint8_t t = f.tag;
                if (case_.retag_to >= 0) t = static_cast<std::uint8_t>(case_.retag_to);
                while (t == f.tag) t = tags[rng_() % std::size(tags)];
                detail_ += " -> " + proto::tag_name(t);
                f.tag = t;
                forward(to, f);
                return true;
            }
            case Mutation::truncate: {
                if (f.len > 0) {
                    f.len = rng_() % f.len;
                    f.payload.resize(f.len);
                    detail_ += " to " + std::to_string(f.len) + " bytes";
                    forward(to, f);
                    return true;
                }
                const Bytes h = header(f.len, f.tag);
                to.write(std::span(h).first(rng_() % h.size()));
                detail_ += " cut mid-header";
                return false;
            }
            case Mutation::reorder: {
                Raw next;
                if (!read_frame(from, next)) {
                    forward(to, f);
                    return true;
                }
                record(counter_++, next.tag);
                detail_ += " <-> " + proto::tag_name(next.tag);
                forward(to, next);
                forward(to, f);
                return true;
            }
        }
        return true;
    }

    Case case_;
    proto::Mode mode_;
    std::mt19937_64 rng_;
    std::unique_ptr<proto::ByteStream> client_;
    std::unique_ptr<proto::ByteStream> server_;
    std::mutex mu_;
    bool applied_ = false;
    std::atomic<std::size_t> counter_{0};
    std::atomic<std::size_t> errors_{0};
    std::string detail_;
    std::vector<std::uint8_t> transcript_;
};

inline Outcome run_case(const Session& s, const Case& c) {
    auto [client_end, proxy_client] = proto::make_pipe();
    auto [server_end, proxy_server] = proto::make_pipe();
    Proxy proxy(c, s.cfg.mode, std::move(proxy_client), std::move(proxy_server));
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    std::thread server([&] { out.server = proto::run_server(*server_end, s.server); });
    std::thread mitm([&] { proxy.run(); });
    out.client = proto::run_client(*client_end, s.cfg, s.client, s.train, s.test);
    server.join();
    mitm.join();
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.applied = proxy.applied();
    out.frames = proxy.frames();
    out.endpoint_errors = proxy.endpoint_errors();
    out.detail = proxy.detail();
    out.transcript = proxy.transcript();
    return out;
}

/// Client and server over a plain pipe.
inline std::pair<proto::RunReport, proto::RunReport> run_session(const Session& s,
                                                                  nn::ClientModel* trained = nullptr) {
    auto [a, b] = proto::make_pipe();
    proto::RunReport server;
    std::thread t([&] { server = proto::run_server(*b, s.server); });
    proto::RunReport client = proto::run_client(*a, s.cfg, s.client, s.train, s.test, trained);
    t.join();
    return {std::move(client), std::move(server)};
}

/// A clean abort: both roles report failure, an endpoint sent an Error
/// frame, and nothing waited out a timeout.
inline bool clean_abort(const Outcome& o, double max_seconds) {
    return !o.client.ok() && !o.server.ok() && o.endpoint_errors > 0 && o.seconds < max_seconds;
}

}  // namespace hesplit::fuzz
