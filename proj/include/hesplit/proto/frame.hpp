#pragma once

#include <chrono>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hesplit/bytes.hpp"
#include "hesplit/proto/stream.hpp"
#include "hesplit/tensor.hpp"

namespace hesplit::proto {

enum class Tag : std::uint8_t {
    sync_config = 0x01,
    sync_ack = 0x02,
    public_context = 0x03,
    activation_plain = 0x10,
    activation_enc = 0x11,
    server_out_plain = 0x20,
    server_out_enc = 0x21,
    grad_output = 0x30,  // dJ/da(L)
    grad_weight = 0x31,  // dJ/dw(L)
    grad_split = 0x40,   // dJ/da(l)
    epoch_done = 0x50,
    training_done = 0x5F,
    error = 0x7F,
};

std::string tag_name(std::uint8_t tag);
bool known_tag(std::uint8_t tag) noexcept;

/// Violation of the message sequence or of a payload format. Raising it
/// aborts the session after an Error frame has been sent to the peer.
class ProtocolError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The peer aborted with an Error frame.
class PeerAborted : public ProtocolError {
public:
    using ProtocolError::ProtocolError;
};

struct Frame {
    Tag tag;
    Bytes payload;
};

/// len u64 | tag u8 | payload.
inline constexpr std::size_t kFrameHeader = 9;
inline std::size_t framed_size(std::size_t payload) { return kFrameHeader + payload; }

/// Upper bound on a single payload; larger length prefixes are rejected
/// before allocating.
inline constexpr std::uint64_t kMaxPayload = std::uint64_t{1} << 32;

/// Framed messaging over a stream with exact per-direction byte counters
/// and a log of every tag sent and received.
class FrameChannel {
public:
    explicit FrameChannel(ByteStream& stream, std::chrono::milliseconds timeout = std::chrono::seconds(60))
        : stream_(stream), timeout_(timeout) {}

    void send(Tag tag, std::span<const std::uint8_t> payload);
    /// Next frame, which must carry `expected`. An Error frame raises
    /// PeerAborted; any other tag raises ProtocolError.
    Frame expect(Tag expected);
    Frame receive();
    /// Waits for orderly end of stream; any further frame is an error.
    void expect_end();
    /// Best-effort Error frame, at most one per channel; never throws. Also
    /// sent after receiving the peer's Error, so that a forged Error cannot
    /// leave the real peer believing the session succeeded.
    void send_error(const std::string& message) noexcept;
    void close() noexcept;

    std::uint64_t bytes_sent() const noexcept { return sent_; }
    std::uint64_t bytes_received() const noexcept { return received_; }
    const std::vector<Tag>& sent_tags() const noexcept { return sent_tags_; }
    const std::vector<Tag>& received_tags() const noexcept { return received_tags_; }
    std::chrono::milliseconds timeout() const noexcept { return timeout_; }

private:
    ByteStream& stream_;
    std::chrono::milliseconds timeout_;
    std::uint64_t sent_ = 0;
    std::uint64_t received_ = 0;
    std::vector<Tag> sent_tags_;
    std::vector<Tag> received_tags_;
    bool error_sent_ = false;
};

/// ndim u8 | dims u64[ndim] | f32 data.
Bytes encode_tensor(const Tensor& t);
void write_tensor(ByteWriter& w, const Tensor& t);
Tensor decode_tensor(std::span<const std::uint8_t> bytes);
std::size_t tensor_payload_size(const Shape& shape);

}  // namespace hesplit::proto
