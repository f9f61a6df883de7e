#include "poly.hpp"

#include <cmath>
#include <numeric>

namespace hesplit::ckks::detail {

RnsPoly small_to_ntt(const ContextData& d, std::span<const std::int8_t> coeffs, std::size_t count) {
    const std::size_t n = d.degree();
    RnsPoly out(n, count);
    for (std::size_t j = 0; j < count; ++j) {
        const Modulus& q = d.prime(j);
        auto r = out[j];
        for (std::size_t c = 0; c < n; ++c) r[c] = q.from_signed(coeffs[c]);
        d.ntt(j).forward(r);
    }
    return out;
}

std::vector<std::int64_t> sample_gaussian(std::size_t n, Prng& prng) {
    std::vector<std::int64_t> e(n);
    for (auto& v : e) v = prng.gaussian(kNoiseSigma);
    return e;
}

void sample_uniform(std::span<u64> out, const Modulus& q, Prng& prng) {
    for (auto& v : out) v = prng.below(q.value());
}

std::vector<std::int8_t> galois_small(std::span<const std::int8_t> s, std::uint32_t g) {
    const std::size_t n = s.size();
    std::vector<std::int8_t> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = i * g % (2 * n);
        if (j < n) {
            out[j] = s[i];
        } else {
            out[j - n] = static_cast<std::int8_t>(-s[i]);
        }
    }
    return out;
}

void galois_residue(std::span<const u64> in, std::span<u64> out, std::uint32_t g, const Modulus& q) {
    const std::size_t n = in.size();
    const std::size_t mask = 2 * n - 1;
    for (std::size_t i = 0, j = 0; i < n; ++i, j = (j + g) & mask) {
        if (j < n) {
            out[j] = in[i];
        } else {
            out[j - n] = q.neg(in[i]);
        }
    }
}

void monomial_residue(std::span<const u64> in, std::span<u64> out, std::size_t shift, const Modulus& q) {
    const std::size_t n = in.size();
    shift %= 2 * n;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t j = i + shift;
        bool negate = false;
        if (j >= n) {
            j -= n;
            negate = true;
        }
        if (j >= n) {
            j -= n;
            negate = !negate;
        }
        out[j] = negate ? q.neg(in[i]) : in[i];
    }
}

std::vector<std::size_t> level_ids(std::size_t level) {
    std::vector<std::size_t> ids(level + 1);
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    return ids;
}

void to_ntt(const ContextData& d, RnsPoly& p, std::span<const std::size_t> ids) {
    for (std::size_t k = 0; k < ids.size(); ++k) d.ntt(ids[k]).forward(p[k]);
}

void from_ntt(const ContextData& d, RnsPoly& p, std::span<const std::size_t> ids) {
    for (std::size_t k = 0; k < ids.size(); ++k) d.ntt(ids[k]).inverse(p[k]);
}

RnsPoly encode(const ContextData& d, std::span<const double> slots, double scale, std::size_t level) {
    const std::vector<double> coeffs = d.encoder().embed_inverse(slots);
    const std::size_t n = d.degree();
    RnsPoly out(n, level + 1);
    constexpr double limit = 0x1.0p62;
    for (std::size_t c = 0; c < n; ++c) {
        const double v = std::round(coeffs[c] * scale);
        if (!(std::abs(v) < limit)) {
            throw CkksError("encode: value out of range for scale " + std::to_string(scale));
        }
        const auto iv = static_cast<std::int64_t>(v);
        for (std::size_t j = 0; j <= level; ++j) out[j][c] = d.prime(j).from_signed(iv);
    }
    return out;
}

}  // namespace hesplit::ckks::detail
