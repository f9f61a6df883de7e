#include "hesplit/proto/frame.hpp"

#include <array>
#include <cstdio>

namespace hesplit::proto {

std::string tag_name(std::uint8_t tag) {
    switch (static_cast<Tag>(tag)) {
        case Tag::sync_config: return "SyncConfig";
        case Tag::sync_ack: return "SyncAck";
        case Tag::public_context: return "PublicContext";
        case Tag::activation_plain: return "ActivationPlain";
        case Tag::activation_enc: return "ActivationEnc";
        case Tag::server_out_plain: return "ServerOutPlain";
        case Tag::server_out_enc: return "ServerOutEnc";
        case Tag::grad_output: return "GradAL";
        case Tag::grad_weight: return "GradWL";
        case Tag::grad_split: return "GradAl";
        case Tag::epoch_done: return "EpochDone";
        case Tag::training_done: return "TrainingDone";
        case Tag::error: return "Error";
    }
    char buf[8];
    std::snprintf(buf, sizeof buf, "0x%02X", tag);
    return buf;
}

bool known_tag(std::uint8_t tag) noexcept { return tag_name(tag).rfind("0x", 0) != 0; }

void FrameChannel::send(Tag tag, std::span<const std::uint8_t> payload) {
    std::array<std::uint8_t, kFrameHeader> header{};
    const std::uint64_t len = payload.size();
    for (int i = 0; i < 8; ++i) header[i] = static_cast<std::uint8_t>(len >> (8 * i));
    header[8] = static_cast<std::uint8_t>(tag);
    stream_.write(header);
    stream_.write(payload);
    sent_ += framed_size(payload.size());
    sent_tags_.push_back(tag);
}

Frame FrameChannel::receive() {
    std::array<std::uint8_t, kFrameHeader> header{};
    stream_.read_exact(header, timeout_);
    std::uint64_t len = 0;
    for (int i = 0; i < 8; ++i) len |= static_cast<std::uint64_t>(header[i]) << (8 * i);
    const std::uint8_t tag = header[8];
    if (!known_tag(tag)) throw ProtocolError("unknown frame tag " + tag_name(tag));
    if (len > kMaxPayload) throw ProtocolError("frame length " + std::to_string(len) + " exceeds limit");
    Frame f{static_cast<Tag>(tag), Bytes(len)};
    stream_.read_exact(f.payload, timeout_);
    received_ += framed_size(len);
    received_tags_.push_back(f.tag);
    return f;
}

Frame FrameChannel::expect(Tag expected) {
    Frame f = receive();
    if (f.tag == Tag::error && expected != Tag::error) {
        throw PeerAborted("peer aborted: " + std::string(f.payload.begin(), f.payload.end()));
    }
    if (f.tag != expected) {
        throw ProtocolError("expected " + tag_name(static_cast<std::uint8_t>(expected)) + ", got " +
                            tag_name(static_cast<std::uint8_t>(f.tag)));
    }
    return f;
}

void FrameChannel::expect_end() {
    std::uint8_t byte = 0;
    if (stream_.read_some({&byte, 1}, timeout_) != 0) {
        throw ProtocolError("unexpected data after TrainingDone");
    }
}

void FrameChannel::send_error(const std::string& message) noexcept {
    if (error_sent_) return;
    error_sent_ = true;
    try {
        const Bytes payload(message.begin(), message.end());
        send(Tag::error, payload);
    } catch (...) {
    }
}

void FrameChannel::close() noexcept {
    try {
        stream_.close();
    } catch (...) {
    }
}

std::size_t tensor_payload_size(const Shape& shape) {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return 1 + 8 * shape.size() + 4 * n;
}

void write_tensor(ByteWriter& w, const Tensor& t) {
    w.put<std::uint8_t>(static_cast<std::uint8_t>(t.ndim()));
    for (auto d : t.shape()) w.put<std::uint64_t>(d);
    for (float v : t.data()) w.put<float>(v);
}

Bytes encode_tensor(const Tensor& t) {
    Bytes out;
    out.reserve(tensor_payload_size(t.shape()));
    ByteWriter w(out);
    write_tensor(w, t);
    return out;
}

Tensor decode_tensor(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes, "tensor");
    const auto ndim = r.get<std::uint8_t>();
    if (ndim == 0 || ndim > 4) r.fail("bad rank " + std::to_string(ndim));
    Shape shape(ndim);
    std::size_t count = 1;
    for (auto& d : shape) {
        d = r.get<std::uint64_t>();
        if (d != 0 && count > (r.remaining() / 4) / d) r.fail("dimensions exceed payload");
        count *= d;
    }
    if (r.remaining() != 4 * count) r.fail("payload length does not match shape " + to_string(shape));
    Tensor t(shape);
    for (float& v : t.data()) v = r.get<float>();
    return t;
}

}  // namespace hesplit::proto
