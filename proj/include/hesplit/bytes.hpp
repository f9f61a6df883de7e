#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hesplit {

using Bytes = std::vector<std::uint8_t>;

/// Malformed, truncated or version-mismatched binary input.
class DecodeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Little-endian append-only encoder.
class ByteWriter {
public:
    explicit ByteWriter(Bytes& out) : out_(out) {}

    template <typename T>
        requires std::is_arithmetic_v<T>
    void put(T value) {
        using U = std::conditional_t<sizeof(T) == 1, std::uint8_t,
                  std::conditional_t<sizeof(T) == 2, std::uint16_t,
                  std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>>>;
        const U bits = std::bit_cast<U>(value);
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            out_.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
        }
    }

    void put_bytes(std::span<const std::uint8_t> data) { out_.insert(out_.end(), data.begin(), data.end()); }

    /// Bulk u64 array, same layout as repeated put<u64>.
    void put_u64s(std::span<const std::uint64_t> values) {
        const std::size_t start = out_.size();
        out_.resize(start + 8 * values.size());
        if constexpr (std::endian::native == std::endian::little) {
            std::memcpy(out_.data() + start, values.data(), 8 * values.size());
        } else {
            for (std::size_t k = 0; k < values.size(); ++k)
                for (int i = 0; i < 8; ++i)
                    out_[start + 8 * k + i] = static_cast<std::uint8_t>(values[k] >> (8 * i));
        }
    }

private:
    Bytes& out_;
};

/// Little-endian decoder over a borrowed buffer; every read is bounds-checked.
class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> data, std::string what = "buffer")
        : data_(data), what_(std::move(what)) {}

    template <typename T>
        requires std::is_arithmetic_v<T>
    T get() {
        using U = std::conditional_t<sizeof(T) == 1, std::uint8_t,
                  std::conditional_t<sizeof(T) == 2, std::uint16_t,
                  std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>>>;
        need(sizeof(T));
        U bits = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            bits |= static_cast<U>(static_cast<U>(data_[pos_ + i]) << (8 * i));
        }
        pos_ += sizeof(T);
        return std::bit_cast<T>(bits);
    }

    std::span<const std::uint8_t> get_bytes(std::size_t n) {
        need(n);
        auto s = data_.subspan(pos_, n);
        pos_ += n;
        return s;
    }

    void get_u64s(std::span<std::uint64_t> out) {
        if (out.size() > remaining() / 8) fail("truncated");
        if constexpr (std::endian::native == std::endian::little) {
            std::memcpy(out.data(), data_.data() + pos_, 8 * out.size());
            pos_ += 8 * out.size();
        } else {
            for (auto& v : out) v = get<std::uint64_t>();
        }
    }

    std::size_t remaining() const noexcept { return data_.size() - pos_; }
    bool done() const noexcept { return pos_ == data_.size(); }
    void expect_done() const {
        if (!done()) fail(std::to_string(remaining()) + " trailing bytes");
    }
    [[noreturn]] void fail(const std::string& why) const { throw DecodeError(what_ + ": " + why); }

private:
    void need(std::size_t n) const {
        if (n > remaining()) fail("truncated");
    }

    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
    std::string what_;
};

}  // namespace hesplit
