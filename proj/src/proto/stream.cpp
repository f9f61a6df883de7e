#include "hesplit/proto/stream.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>
#include <thread>

namespace hesplit::proto {

namespace {

struct Channel {
    std::mutex mu;
    std::condition_variable cv;
    std::deque<std::uint8_t> buffer;
    bool closed = false;
};

class PipeEnd final : public ByteStream {
public:
    PipeEnd(std::shared_ptr<Channel> in, std::shared_ptr<Channel> out) : in_(std::move(in)), out_(std::move(out)) {}
    ~PipeEnd() override { close(); }

    void write(std::span<const std::uint8_t> bytes) override {
        std::lock_guard lock(out_->mu);
        if (out_->closed) throw TransportError("pipe: write after close");
        out_->buffer.insert(out_->buffer.end(), bytes.begin(), bytes.end());
        out_->cv.notify_all();
    }

    void read_exact(std::span<std::uint8_t> out, std::chrono::milliseconds timeout) override {
        std::size_t got = 0;
        while (got < out.size()) {
            const std::size_t n = read_some(out.subspan(got), timeout);
            if (n == 0) throw TransportError("pipe: end of stream");
            got += n;
        }
    }

    std::size_t read_some(std::span<std::uint8_t> out, std::chrono::milliseconds timeout) override {
        if (out.empty()) return 0;
        std::unique_lock lock(in_->mu);
        if (!in_->cv.wait_for(lock, timeout, [&] { return !in_->buffer.empty() || in_->closed; })) {
            throw TimeoutError("pipe: read timed out");
        }
        const std::size_t n = std::min(out.size(), in_->buffer.size());
        std::copy_n(in_->buffer.begin(), n, out.begin());
        in_->buffer.erase(in_->buffer.begin(), in_->buffer.begin() + static_cast<std::ptrdiff_t>(n));
        return n;
    }

    void close() override {
        std::lock_guard lock(out_->mu);
        out_->closed = true;
        out_->cv.notify_all();
    }

private:
    std::shared_ptr<Channel> in_;
    std::shared_ptr<Channel> out_;
};

[[noreturn]] void sys_fail(const std::string& what) {
    throw TransportError(what + ": " + std::strerror(errno));
}

class TcpStream final : public ByteStream {
public:
    explicit TcpStream(int fd) : fd_(fd) {
        int one = 1;
        ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    }
    ~TcpStream() override { ::close(fd_); }

    void write(std::span<const std::uint8_t> bytes) override {
        while (!bytes.empty()) {
            const ssize_t n = ::send(fd_, bytes.data(), bytes.size(), MSG_NOSIGNAL);
            if (n < 0) {
                if (errno == EINTR) continue;
                sys_fail("tcp send");
            }
            bytes = bytes.subspan(static_cast<std::size_t>(n));
        }
    }

    void read_exact(std::span<std::uint8_t> out, std::chrono::milliseconds timeout) override {
        std::size_t got = 0;
        while (got < out.size()) {
            const std::size_t n = read_some(out.subspan(got), timeout);
            if (n == 0) throw TransportError("tcp: connection closed by peer");
            got += n;
        }
    }

    std::size_t read_some(std::span<std::uint8_t> out, std::chrono::milliseconds timeout) override {
        if (out.empty()) return 0;
        pollfd p{fd_, POLLIN, 0};
        int r;
        do {
            r = ::poll(&p, 1, static_cast<int>(timeout.count()));
        } while (r < 0 && errno == EINTR);
        if (r < 0) sys_fail("tcp poll");
        if (r == 0) throw TimeoutError("tcp: read timed out");
        ssize_t n;
        do {
            n = ::recv(fd_, out.data(), out.size(), 0);
        } while (n < 0 && errno == EINTR);
        if (n < 0) sys_fail("tcp recv");
        return static_cast<std::size_t>(n);
    }

    void close() override { ::shutdown(fd_, SHUT_WR); }

private:
    int fd_;
};

sockaddr_in resolve(const Endpoint& ep) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (const int rc = ::getaddrinfo(ep.host.c_str(), nullptr, &hints, &res); rc != 0) {
        throw TransportError("cannot resolve " + ep.host + ": " + ::gai_strerror(rc));
    }
    sockaddr_in addr{};
    std::memcpy(&addr, res->ai_addr, sizeof addr);
    ::freeaddrinfo(res);
    addr.sin_port = htons(ep.port);
    return addr;
}

}  // namespace

std::pair<std::unique_ptr<ByteStream>, std::unique_ptr<ByteStream>> make_pipe() {
    auto ab = std::make_shared<Channel>();
    auto ba = std::make_shared<Channel>();
    return {std::make_unique<PipeEnd>(ba, ab), std::make_unique<PipeEnd>(ab, ba)};
}

Endpoint Endpoint::parse(const std::string& text) {
    const auto colon = text.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
        throw std::invalid_argument("endpoint must be host:port, got '" + text + "'");
    }
    std::size_t used = 0;
    unsigned long port = 0;
    try {
        port = std::stoul(text.substr(colon + 1), &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != text.size() - colon - 1 || port > 65535) {
        throw std::invalid_argument("bad port in endpoint '" + text + "'");
    }
    return {text.substr(0, colon), static_cast<std::uint16_t>(port)};
}

std::unique_ptr<ByteStream> tcp_connect(const Endpoint& ep, std::chrono::milliseconds timeout) {
    const sockaddr_in addr = resolve(ep);
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
        const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd < 0) sys_fail("socket");
        if (::connect(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) == 0) {
            return std::make_unique<TcpStream>(fd);
        }
        const int err = errno;
        ::close(fd);
        if (std::chrono::steady_clock::now() >= deadline) {
            errno = err;
            sys_fail("connect to " + ep.str());
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
}

TcpListener::TcpListener(const Endpoint& ep) {
    const sockaddr_in addr = resolve(ep);
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) sys_fail("socket");
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0 || ::listen(fd_, 1) != 0) {
        const int err = errno;
        ::close(fd_);
        errno = err;
        sys_fail("listen on " + ep.str());
    }
    sockaddr_in bound{};
    socklen_t len = sizeof bound;
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&bound), &len);
    port_ = ntohs(bound.sin_port);
}

TcpListener::~TcpListener() { ::close(fd_); }

std::unique_ptr<ByteStream> TcpListener::accept(std::chrono::milliseconds timeout) {
    pollfd p{fd_, POLLIN, 0};
    if (::poll(&p, 1, static_cast<int>(timeout.count())) <= 0) throw TimeoutError("no client connected");
    const int fd = ::accept(fd_, nullptr, nullptr);
    if (fd < 0) sys_fail("accept");
    return std::make_unique<TcpStream>(fd);
}

}  // namespace hesplit::proto
