#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace hesplit::ckks {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

/// An odd prime below 2^62 together with its Barrett constant floor(2^128/q).
class Modulus {
public:
    Modulus() = default;
    explicit Modulus(u64 value);

    u64 value() const noexcept { return value_; }
    int bits() const noexcept { return bits_; }

    u64 reduce(u128 x) const noexcept;
    u64 mul(u64 a, u64 b) const noexcept { return reduce(static_cast<u128>(a) * b); }
    u64 add(u64 a, u64 b) const noexcept {
        const u64 s = a + b;
        return s >= value_ ? s - value_ : s;
    }
    u64 sub(u64 a, u64 b) const noexcept { return a >= b ? a - b : a + value_ - b; }
    u64 neg(u64 a) const noexcept { return a == 0 ? 0 : value_ - a; }
    u64 pow(u64 base, u64 exp) const noexcept;
    /// Inverse of a nonzero residue (Fermat).
    u64 inv(u64 a) const;
    /// Residue of a signed integer.
    u64 from_signed(std::int64_t v) const noexcept;
    /// Representative in (-q/2, q/2].
    std::int64_t centered(u64 a) const noexcept {
        return a > value_ / 2 ? static_cast<std::int64_t>(a) - static_cast<std::int64_t>(value_)
                              : static_cast<std::int64_t>(a);
    }

    bool operator==(const Modulus& o) const noexcept { return value_ == o.value_; }

private:
    u64 value_ = 0;
    u64 ratio_hi_ = 0;
    u64 ratio_lo_ = 0;
    int bits_ = 0;
};

/// Multiplication by a fixed operand w with the precomputed quotient
/// floor(w * 2^64 / q).
struct ShoupOperand {
    u64 value = 0;
    u64 quotient = 0;

    ShoupOperand() = default;
    ShoupOperand(u64 w, const Modulus& q);

    u64 mul(u64 x, u64 q) const noexcept {
        const u64 hi = static_cast<u64>((static_cast<u128>(x) * quotient) >> 64);
        const u64 r = x * value - hi * q;
        return r >= q ? r - q : r;
    }
};

bool is_prime(u64 n);

/// Distinct primes q = 1 mod 2n with exactly bits[i] bits, each the largest
/// such prime not already taken.
std::vector<u64> generate_primes(std::span<const int> bits, std::size_t n);

/// Negacyclic NTT over Z_q[X]/(X^n + 1).
class NttTables {
public:
    NttTables(std::size_t n, const Modulus& q);

    std::size_t size() const noexcept { return n_; }
    const Modulus& modulus() const noexcept { return q_; }

    void forward(std::span<u64> a) const;
    void inverse(std::span<u64> a) const;

private:
    std::size_t n_;
    Modulus q_;
    std::vector<ShoupOperand> roots_;      // psi^bitrev(i)
    std::vector<ShoupOperand> inv_roots_;  // psi^-bitrev(i)
    ShoupOperand inv_n_;
};

}  // namespace hesplit::ckks
