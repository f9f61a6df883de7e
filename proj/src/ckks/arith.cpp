#include "hesplit/ckks/arith.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>
#include <string>

namespace hesplit::ckks {

Modulus::Modulus(u64 value) : value_(value) {
    if (value < 3 || value >> 62 != 0) {
        throw std::invalid_argument("Modulus: value must be in [3, 2^62)");
    }
    bits_ = std::bit_width(value);
    // floor(2^128 / q) as two words: long division of 2^128 by q.
    const u128 hi = (static_cast<u128>(1) << 64) / value;  // contributes to ratio_hi
    const u128 rem = (static_cast<u128>(1) << 64) % value;
    const u128 lo = (rem << 64) / value;
    ratio_hi_ = static_cast<u64>(hi);
    ratio_lo_ = static_cast<u64>(lo);
}

u64 Modulus::reduce(u128 x) const noexcept {
    const u64 x_lo = static_cast<u64>(x);
    const u64 x_hi = static_cast<u64>(x >> 64);
    // Upper 128 bits of x * ratio, keeping only the 64-bit quotient estimate.
    const u64 carry = static_cast<u64>((static_cast<u128>(x_lo) * ratio_lo_) >> 64);
    const u128 mid = static_cast<u128>(x_lo) * ratio_hi_;
    const u128 mid2 = static_cast<u128>(x_hi) * ratio_lo_;
    const u128 sum = static_cast<u128>(static_cast<u64>(mid)) + static_cast<u64>(mid2) + carry;
    const u64 q_est = x_hi * ratio_hi_ + static_cast<u64>(mid >> 64) + static_cast<u64>(mid2 >> 64) +
                      static_cast<u64>(sum >> 64);
    u64 r = x_lo - q_est * value_;
    return r >= value_ ? r - value_ : r;
}

u64 Modulus::pow(u64 base, u64 exp) const noexcept {
    u64 result = 1;
    base %= value_;
    while (exp) {
        if (exp & 1) result = mul(result, base);
        base = mul(base, base);
        exp >>= 1;
    }
    return result;
}

u64 Modulus::inv(u64 a) const {
    if (a % value_ == 0) {
        throw std::domain_error("Modulus::inv: zero has no inverse");
    }
    return pow(a, value_ - 2);
}

u64 Modulus::from_signed(std::int64_t v) const noexcept {
    if (v >= 0) return static_cast<u64>(v) % value_;
    const u64 m = static_cast<u64>(-(v + 1)) % value_;  // avoids overflow at INT64_MIN
    return value_ - 1 - m;
}

ShoupOperand::ShoupOperand(u64 w, const Modulus& q)
    : value(w), quotient(static_cast<u64>((static_cast<u128>(w) << 64) / q.value())) {}

namespace {

u64 mulmod(u64 a, u64 b, u64 m) { return static_cast<u64>(static_cast<u128>(a) * b % m); }

u64 powmod(u64 b, u64 e, u64 m) {
    u64 r = 1;
    b %= m;
    while (e) {
        if (e & 1) r = mulmod(r, b, m);
        b = mulmod(b, b, m);
        e >>= 1;
    }
    return r;
}

std::size_t bit_reverse(std::size_t x, int bits) {
    std::size_t r = 0;
    for (int i = 0; i < bits; ++i) {
        r = (r << 1) | ((x >> i) & 1);
    }
    return r;
}

}  // namespace

bool is_prime(u64 n) {
    if (n < 2) return false;
    for (u64 p : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
        if (n % p == 0) return n == p;
    }
    u64 d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    // These bases are deterministic for every 64-bit n.
    for (u64 a : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
        u64 x = powmod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int r = 1; r < s; ++r) {
            x = mulmod(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

std::vector<u64> generate_primes(std::span<const int> bits, std::size_t n) {
    const u64 step = 2 * static_cast<u64>(n);
    std::vector<u64> out;
    for (int b : bits) {
        if (b < 2 || b > 61) {
            throw std::invalid_argument("generate_primes: bit length " + std::to_string(b) +
                                        " out of range");
        }
        const u64 top = u64{1} << b;
        u64 candidate = top - step + 1;  // largest value below 2^b that is 1 mod 2n
        bool found = false;
        for (; candidate >= (top >> 1) && candidate < top; candidate -= step) {
            if (is_prime(candidate) && std::find(out.begin(), out.end(), candidate) == out.end()) {
                found = true;
                break;
            }
        }
        if (!found) {
            throw std::invalid_argument("generate_primes: no " + std::to_string(b) +
                                        "-bit prime = 1 mod " + std::to_string(step));
        }
        out.push_back(candidate);
    }
    return out;
}

NttTables::NttTables(std::size_t n, const Modulus& q) : n_(n), q_(q) {
    if (n < 2 || (n & (n - 1)) != 0) {
        throw std::invalid_argument("NttTables: degree must be a power of two");
    }
    const u64 qv = q.value();
    const u64 order = 2 * n;
    if ((qv - 1) % order != 0) {
        throw std::invalid_argument("NttTables: modulus is not 1 mod 2n");
    }
    // A primitive 2n-th root: g^((q-1)/2n) with psi^n = -1.
    u64 psi = 0;
    for (u64 g = 2; g < qv; ++g) {
        const u64 cand = q.pow(g, (qv - 1) / order);
        if (q.pow(cand, n) == qv - 1) {
            psi = cand;
            break;
        }
    }
    // Use the smallest primitive root power so tables are canonical.
    u64 best = psi;
    u64 cur = psi;
    const u64 psi2 = q.mul(psi, psi);
    for (std::size_t k = 1; k < n; ++k) {
        cur = q.mul(cur, psi2);
        if (cur < best) best = cur;
    }
    psi = best;

    const int logn = std::countr_zero(n);
    const u64 psi_inv = q.inv(psi);
    roots_.resize(n);
    inv_roots_.resize(n);
    u64 p = 1, pi = 1;
    std::vector<u64> pw(n), pwi(n);
    for (std::size_t i = 0; i < n; ++i) {
        pw[i] = p;
        pwi[i] = pi;
        p = q.mul(p, psi);
        pi = q.mul(pi, psi_inv);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = bit_reverse(i, logn);
        roots_[i] = ShoupOperand(pw[r], q);
        inv_roots_[i] = ShoupOperand(pwi[r], q);
    }
    inv_n_ = ShoupOperand(q.inv(n % qv), q);
}

void NttTables::forward(std::span<u64> a) const {
    const u64 q = q_.value();
    const u64 two_q = 2 * q;
    std::size_t t = n_;
    for (std::size_t m = 1; m < n_; m <<= 1) {
        t >>= 1;
        for (std::size_t i = 0; i < m; ++i) {
            const ShoupOperand& w = roots_[m + i];
            u64* x = a.data() + 2 * i * t;
            u64* y = x + t;
            for (std::size_t j = 0; j < t; ++j) {
                // Harvey butterfly with lazy reduction in [0, 4q).
                u64 u = x[j] >= two_q ? x[j] - two_q : x[j];
                const u64 hi = static_cast<u64>((static_cast<u128>(y[j]) * w.quotient) >> 64);
                const u64 v = y[j] * w.value - hi * q;
                x[j] = u + v;
                y[j] = u + two_q - v;
            }
        }
    }
    for (u64& v : a) {
        if (v >= two_q) v -= two_q;
        if (v >= q) v -= q;
    }
}

void NttTables::inverse(std::span<u64> a) const {
    const u64 q = q_.value();
    const u64 two_q = 2 * q;
    std::size_t t = 1;
    for (std::size_t m = n_ >> 1; m >= 1; m >>= 1) {
        for (std::size_t i = 0; i < m; ++i) {
            const ShoupOperand& w = inv_roots_[m + i];
            u64* x = a.data() + 2 * i * t;
            u64* y = x + t;
            for (std::size_t j = 0; j < t; ++j) {
                const u64 u = x[j];
                const u64 v = y[j];
                u64 s = u + v;
                if (s >= two_q) s -= two_q;
                x[j] = s;
                const u64 d = u + two_q - v;
                const u64 hi = static_cast<u64>((static_cast<u128>(d) * w.quotient) >> 64);
                y[j] = d * w.value - hi * q;
            }
        }
        t <<= 1;
    }
    for (u64& v : a) {
        v = inv_n_.mul(v, q);
    }
}

}  // namespace hesplit::ckks
