#include "hesplit/ckks/prng.hpp"

#include <sodium.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <numbers>
#include <stdexcept>

namespace hesplit::ckks {

namespace {

void ensure_sodium() {
    static const bool ready = sodium_init() >= 0;
    if (!ready) {
        throw std::runtime_error("libsodium failed to initialize");
    }
}

}  // namespace

Prng::Prng() {
    ensure_sodium();
    randombytes_buf(key_.data(), key_.size());
}

Prng::Prng(std::uint64_t seed) {
    ensure_sodium();
    unsigned char in[16] = {'h', 'e', 's', 'p', 'l', 'i', 't', '-'};
    for (int i = 0; i < 8; ++i) {
        in[8 + i] = static_cast<unsigned char>(seed >> (8 * i));
    }
    crypto_generichash(key_.data(), key_.size(), in, sizeof in, nullptr, 0);
}

void Prng::refill() {
    unsigned char nonce[crypto_stream_chacha20_ietf_NONCEBYTES] = {};
    for (int i = 0; i < 8; ++i) {
        nonce[i] = static_cast<unsigned char>(block_ >> (8 * i));
    }
    ++block_;
    crypto_stream_chacha20_ietf(buffer_.data(), buffer_.size(), nonce, key_.data());
    pos_ = 0;
}

std::uint8_t Prng::next_byte() {
    if (pos_ == buffer_.size()) refill();
    return buffer_[pos_++];
}

std::uint64_t Prng::next_u64() {
    if (pos_ + 8 > buffer_.size()) refill();
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v |= static_cast<std::uint64_t>(buffer_[pos_ + i]) << (8 * i);
    }
    pos_ += 8;
    return v;
}

double Prng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t Prng::below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("Prng::below: zero bound");
    const int shift = std::countl_zero((bound - 1) | 1);
    for (;;) {
        const std::uint64_t v = bound == 1 ? 0 : next_u64() >> shift;
        if (v < bound) return v;
    }
}

std::int64_t Prng::gaussian(double sigma) {
    for (;;) {
        double u1 = uniform();
        if (u1 <= 0.0) continue;
        const double u2 = uniform();
        const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
        const double x = std::round(sigma * z);
        if (std::abs(x) <= 6.0 * sigma) return static_cast<std::int64_t>(x);
    }
}

int Prng::ternary() {
    for (;;) {
        const std::uint8_t b = next_byte();
        if (b < 255) return static_cast<int>(b % 3) - 1;
    }
}

}  // namespace hesplit::ckks
