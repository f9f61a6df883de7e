#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>

namespace hesplit::proto {

/// Transport failure: timeout, reset or premature end of stream.
class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TimeoutError : public TransportError {
public:
    using TransportError::TransportError;
};

/// Reliable, ordered, bidirectional byte stream.
class ByteStream {
public:
    virtual ~ByteStream() = default;

    virtual void write(std::span<const std::uint8_t> bytes) = 0;
    /// Fills out completely or throws. TransportError on end of stream,
    /// TimeoutError when nothing arrives for `timeout`.
    virtual void read_exact(std::span<std::uint8_t> out, std::chrono::milliseconds timeout) = 0;
    /// Reads whatever is available, blocking until at least one byte or end
    /// of stream (returns 0).
    virtual std::size_t read_some(std::span<std::uint8_t> out, std::chrono::milliseconds timeout) = 0;
    /// Ends our sending direction; the peer sees end of stream.
    virtual void close() = 0;
};

/// Two connected in-process endpoints.
std::pair<std::unique_ptr<ByteStream>, std::unique_ptr<ByteStream>> make_pipe();

struct Endpoint {
    std::string host;
    std::uint16_t port = 0;

    /// "host:port"; throws std::invalid_argument.
    static Endpoint parse(const std::string& text);
    std::string str() const { return host + ":" + std::to_string(port); }
};

/// Blocking TCP client connection, retrying until `timeout`.
std::unique_ptr<ByteStream> tcp_connect(const Endpoint& ep, std::chrono::milliseconds timeout);

/// Listening socket accepting a single session.
class TcpListener {
public:
    explicit TcpListener(const Endpoint& ep);
    ~TcpListener();
    TcpListener(const TcpListener&) = delete;
    TcpListener& operator=(const TcpListener&) = delete;

    /// Bound port (useful when listening on port 0).
    std::uint16_t port() const noexcept { return port_; }
    std::unique_ptr<ByteStream> accept(std::chrono::milliseconds timeout);

private:
    int fd_ = -1;
    std::uint16_t port_ = 0;
};

}  // namespace hesplit::proto
