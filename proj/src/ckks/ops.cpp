#include <algorithm>
#include <bit>
#include <cmath>
#include <optional>

#include "hesplit/ckks/ckks.hpp"
#include "poly.hpp"

namespace hesplit::ckks {

using detail::from_ntt;
using detail::level_ids;
using detail::to_ntt;

namespace {

Ciphertext finish_encryption(const ContextData& d, RnsPoly c0, RnsPoly c1, double scale) {
    Ciphertext ct;
    ct.level = d.top_level();
    ct.scale = scale;
    ct.c0 = std::move(c0);
    ct.c1 = std::move(c1);
    return ct;
}

void add_into(const ContextData& d, RnsPoly& acc, const RnsPoly& x) {
    for (std::size_t j = 0; j < acc.primes(); ++j) {
        const Modulus& q = d.prime(j);
        auto a = acc[j];
        const auto b = x[j];
        for (std::size_t c = 0; c < a.size(); ++c) a[c] = q.add(a[c], b[c]);
    }
}

void sub_into(const ContextData& d, RnsPoly& acc, const RnsPoly& x) {
    for (std::size_t j = 0; j < acc.primes(); ++j) {
        const Modulus& q = d.prime(j);
        auto a = acc[j];
        const auto b = x[j];
        for (std::size_t c = 0; c < a.size(); ++c) a[c] = q.sub(a[c], b[c]);
    }
}

/// acc += x * y over NTT-form residues with matching prime ids.
void mul_add_into(std::span<u64> acc, std::span<const u64> x, std::span<const u64> y, const Modulus& q) {
    for (std::size_t c = 0; c < acc.size(); ++c) acc[c] = q.add(acc[c], q.mul(x[c], y[c]));
}

void check_same_shape(const Ciphertext& a, const Ciphertext& b) {
    if (a.level != b.level) {
        throw CkksError("level mismatch: " + std::to_string(a.level) + " vs " + std::to_string(b.level));
    }
    if (a.scale != b.scale) {
        throw CkksError("scale mismatch: " + std::to_string(a.scale) + " vs " + std::to_string(b.scale));
    }
}

/// Decryption polynomial c0 + c1*s over primes 0..level, coefficient form.
RnsPoly decrypt_poly(const PrivateContext& ctx, const Ciphertext& ct) {
    const ContextData& d = ctx.data();
    const auto ids = level_ids(ct.level);
    RnsPoly s = detail::small_to_ntt(d, ctx.secret_key().coefficients(), ct.level + 1);
    RnsPoly m = ct.c1;
    to_ntt(d, m, ids);
    for (std::size_t j = 0; j <= ct.level; ++j) {
        const Modulus& q = d.prime(j);
        auto r = m[j];
        const auto sj = s[j];
        for (std::size_t c = 0; c < r.size(); ++c) r[c] = q.mul(r[c], sj[c]);
    }
    from_ntt(d, m, ids);
    add_into(d, m, ct.c0);
    return m;
}

/// Centered CRT lift of coefficients by Garner's mixed-radix method.
class CrtLift {
public:
    CrtLift(const ContextData& d, std::size_t level) : d_(d), level_(level) {
        u128 prod = 1;
        for (std::size_t k = 0; k <= level; ++k) {
            const Modulus& q = d.prime(k);
            inv_prefix_.push_back(k == 0 ? 1 : q.inv(static_cast<u64>(prod % q.value())));
            prod *= q.value();
        }
        total_ = prod;
    }

    double operator()(const RnsPoly& m, std::size_t c) const {
        u128 v = m[0][c];
        u128 prod = d_.prime(0).value();
        for (std::size_t k = 1; k <= level_; ++k) {
            const Modulus& q = d_.prime(k);
            const u64 vk = static_cast<u64>(v % q.value());
            const u64 t = q.mul(q.sub(m[k][c], vk), inv_prefix_[k]);
            v += static_cast<u128>(t) * prod;
            prod *= q.value();
        }
        if (v > total_ / 2) return -static_cast<double>(total_ - v);
        return static_cast<double>(v);
    }

private:
    const ContextData& d_;
    std::size_t level_;
    std::vector<u64> inv_prefix_;
    u128 total_ = 0;
};

/// Key switching of d (coefficient form, primes 0..level) with the hybrid
/// gadget: every residue is split into base-2^w digits, multiplied by the
/// key over q0..q_level and P, then divided by P with rounding.
std::pair<RnsPoly, RnsPoly> key_switch(const ContextData& d, const RnsPoly& input, std::size_t level,
                                       const KSwitchKey& key) {
    const std::size_t n = d.degree();
    const std::size_t special = d.special_index();
    std::vector<std::size_t> ids = level_ids(level);
    ids.push_back(special);
    const std::size_t count = ids.size();
    const int w = d.gadget_bits();
    const u64 mask = (u64{1} << w) - 1;

    RnsPoly acc0(n, count), acc1(n, count);
    std::vector<u64> digit(n);
    std::size_t index = 0;
    for (std::size_t i = 0; i <= level; ++i) {
        const auto src = input[i];
        for (std::size_t k = 0; k < d.digits_of_prime(i); ++k, ++index) {
            const RnsPoly& kb = key.b.at(index);
            const RnsPoly& ka = key.a.at(index);
            for (std::size_t jj = 0; jj < count; ++jj) {
                const std::size_t j = ids[jj];
                const Modulus& q = d.prime(j);
                const u64 qv = q.value();
                for (std::size_t c = 0; c < n; ++c) {
                    const u64 x = (src[c] >> (w * k)) & mask;
                    digit[c] = x >= qv ? x % qv : x;
                }
                d.ntt(j).forward(digit);
                mul_add_into(acc0[jj], digit, kb[j], q);
                mul_add_into(acc1[jj], digit, ka[j], q);
            }
        }
    }
    from_ntt(d, acc0, ids);
    from_ntt(d, acc1, ids);

    const Modulus& p = d.prime(special);
    auto mod_down = [&](const RnsPoly& acc) {
        RnsPoly out(n, level + 1);
        const auto last = acc[count - 1];
        for (std::size_t j = 0; j <= level; ++j) {
            const Modulus& q = d.prime(j);
            const u64 pinv = d.special_inverse(j);
            auto o = out[j];
            const auto a = acc[j];
            for (std::size_t c = 0; c < n; ++c) {
                const u64 r = q.from_signed(p.centered(last[c]));
                o[c] = q.mul(q.sub(a[c], r), pinv);
            }
        }
        return out;
    };
    return {mod_down(acc0), mod_down(acc1)};
}

struct PolyPair {
    RnsPoly c0;
    RnsPoly c1;
};

PolyPair galois_pair(const PublicContext& ctx, const PolyPair& in, std::size_t level, std::uint32_t g) {
    const ContextData& d = ctx.data();
    const std::size_t n = d.degree();
    RnsPoly c0(n, level + 1), c1(n, level + 1);
    for (std::size_t j = 0; j <= level; ++j) {
        detail::galois_residue(in.c0[j], c0[j], g, d.prime(j));
        detail::galois_residue(in.c1[j], c1[j], g, d.prime(j));
    }
    auto [k0, k1] = key_switch(d, c1, level, ctx.galois_key(g));
    add_into(d, k0, c0);
    return {std::move(k0), std::move(k1)};
}

}  // namespace

Ciphertext encrypt(const PrivateContext& ctx, std::span<const double> slots, Prng& prng) {
    const ContextData& d = ctx.data();
    const std::size_t n = d.degree();
    const std::size_t level = d.top_level();
    const auto ids = level_ids(level);
    RnsPoly m = detail::encode(d, slots, d.params().scale(), level);
    RnsPoly s = detail::small_to_ntt(d, ctx.secret_key().coefficients(), level + 1);

    RnsPoly a(n, level + 1);
    for (std::size_t j = 0; j <= level; ++j) detail::sample_uniform(a[j], d.prime(j), prng);
    const auto e = detail::sample_gaussian(n, prng);

    // c0 = -a*s + e + m, computed with a in NTT form then brought back.
    RnsPoly as = a;
    to_ntt(d, as, ids);
    for (std::size_t j = 0; j <= level; ++j) {
        const Modulus& q = d.prime(j);
        auto r = as[j];
        const auto sj = s[j];
        for (std::size_t c = 0; c < n; ++c) r[c] = q.mul(r[c], sj[c]);
    }
    from_ntt(d, as, ids);
    RnsPoly c0(n, level + 1);
    for (std::size_t j = 0; j <= level; ++j) {
        const Modulus& q = d.prime(j);
        for (std::size_t c = 0; c < n; ++c) {
            c0[j][c] = q.add(q.sub(q.from_signed(e[c]), as[j][c]), m[j][c]);
        }
    }
    return finish_encryption(d, std::move(c0), std::move(a), d.params().scale());
}

Ciphertext encrypt(const PublicContext& ctx, std::span<const double> slots, Prng& prng) {
    const ContextData& d = ctx.data();
    const std::size_t n = d.degree();
    const std::size_t level = d.top_level();
    const auto ids = level_ids(level);
    RnsPoly m = detail::encode(d, slots, d.params().scale(), level);

    std::vector<std::int8_t> u(n);
    for (auto& v : u) v = static_cast<std::int8_t>(prng.ternary());
    RnsPoly u_ntt = detail::small_to_ntt(d, u, level + 1);
    const auto e0 = detail::sample_gaussian(n, prng);
    const auto e1 = detail::sample_gaussian(n, prng);

    const PublicKey& pk = ctx.public_key();
    RnsPoly c0(n, level + 1), c1(n, level + 1);
    for (std::size_t j = 0; j <= level; ++j) {
        const Modulus& q = d.prime(j);
        for (std::size_t c = 0; c < n; ++c) {
            c0[j][c] = q.mul(pk.b[j][c], u_ntt[j][c]);
            c1[j][c] = q.mul(pk.a[j][c], u_ntt[j][c]);
        }
    }
    from_ntt(d, c0, ids);
    from_ntt(d, c1, ids);
    for (std::size_t j = 0; j <= level; ++j) {
        const Modulus& q = d.prime(j);
        for (std::size_t c = 0; c < n; ++c) {
            c0[j][c] = q.add(q.add(c0[j][c], q.from_signed(e0[c])), m[j][c]);
            c1[j][c] = q.add(c1[j][c], q.from_signed(e1[c]));
        }
    }
    return finish_encryption(d, std::move(c0), std::move(c1), d.params().scale());
}

std::vector<double> decrypt_coefficients(const PrivateContext& ctx, const Ciphertext& ct) {
    const ContextData& d = ctx.data();
    const RnsPoly m = decrypt_poly(ctx, ct);
    const CrtLift lift(d, ct.level);
    std::vector<double> out(d.degree());
    for (std::size_t c = 0; c < out.size(); ++c) out[c] = lift(m, c) / ct.scale;
    return out;
}

std::vector<std::complex<double>> decrypt(const PrivateContext& ctx, const Ciphertext& ct) {
    return ctx.data().encoder().embed(decrypt_coefficients(ctx, ct));
}

Ciphertext add(const PublicContext& ctx, const Ciphertext& a, const Ciphertext& b) {
    check_same_shape(a, b);
    Ciphertext out = a;
    add_into(ctx.data(), out.c0, b.c0);
    add_into(ctx.data(), out.c1, b.c1);
    return out;
}

Ciphertext add_plain(const PublicContext& ctx, const Ciphertext& a, std::span<const double> slots) {
    Ciphertext out = a;
    add_into(ctx.data(), out.c0, detail::encode(ctx.data(), slots, a.scale, a.level));
    return out;
}

void rescale(const PublicContext& ctx, Ciphertext& ct) {
    if (ct.level == 0) throw DepthExceeded();
    const ContextData& d = ctx.data();
    const std::size_t last = ct.level;
    const Modulus& ql = d.prime(last);
    for (RnsPoly* poly : {&ct.c0, &ct.c1}) {
        const auto top = (*poly)[last];
        for (std::size_t j = 0; j < last; ++j) {
            const Modulus& q = d.prime(j);
            const u64 inv = d.rescale_factor(last, j);
            auto r = (*poly)[j];
            for (std::size_t c = 0; c < r.size(); ++c) {
                r[c] = q.mul(q.sub(r[c], q.from_signed(ql.centered(top[c]))), inv);
            }
        }
        poly->drop_last();
    }
    ct.scale /= static_cast<double>(ql.value());
    --ct.level;
}

Ciphertext mul_plain(const PublicContext& ctx, const Ciphertext& a, std::span<const double> slots) {
    if (a.level == 0) throw DepthExceeded();
    const ContextData& d = ctx.data();
    const auto ids = level_ids(a.level);
    const double pt_scale = static_cast<double>(d.prime(a.level).value());
    RnsPoly pt = detail::encode(d, slots, pt_scale, a.level);
    to_ntt(d, pt, ids);
    Ciphertext out = a;
    for (RnsPoly* poly : {&out.c0, &out.c1}) {
        to_ntt(d, *poly, ids);
        for (std::size_t j = 0; j <= a.level; ++j) {
            const Modulus& q = d.prime(j);
            auto r = (*poly)[j];
            const auto p = pt[j];
            for (std::size_t c = 0; c < r.size(); ++c) r[c] = q.mul(r[c], p[c]);
        }
        from_ntt(d, *poly, ids);
    }
    out.scale = a.scale * pt_scale;
    rescale(ctx, out);
    return out;
}

Ciphertext apply_galois(const PublicContext& ctx, const Ciphertext& ct, std::uint32_t element) {
    PolyPair r = galois_pair(ctx, PolyPair{ct.c0, ct.c1}, ct.level, element);
    Ciphertext out;
    out.c0 = std::move(r.c0);
    out.c1 = std::move(r.c1);
    out.level = ct.level;
    out.scale = ct.scale;
    return out;
}

Ciphertext rotate(const PublicContext& ctx, const Ciphertext& ct, long steps) {
    const auto slots = static_cast<long>(ctx.params().slot_count());
    auto k = static_cast<std::size_t>(((steps % slots) + slots) % slots);
    Ciphertext out = ct;
    for (std::size_t bit = 1; k; bit <<= 1) {
        if (k & bit) {
            out = apply_galois(ctx, out, rotation_element(ctx.params().poly_degree, bit));
            k &= ~bit;
        }
    }
    return out;
}

namespace {

void check_slot_layout(const EncryptedVector& v, const char* op) {
    if (v.layout != Layout::slots) {
        throw CkksError(std::string(op) + ": requires slot layout");
    }
}

template <typename Fn>
EncryptedVector map_chunks(const PublicContext& ctx, const EncryptedVector& a, std::span<const double> v,
                           const char* op, Fn fn) {
    check_slot_layout(a, op);
    if (v.size() != a.length) {
        throw CkksError(std::string(op) + ": plaintext length " + std::to_string(v.size()) +
                        " does not match " + std::to_string(a.length));
    }
    const std::size_t slots = ctx.params().slot_count();
    EncryptedVector out{a.length, a.layout, a.stride, {}};
    for (std::size_t i = 0; i < a.ciphertexts.size(); ++i) {
        const std::size_t begin = i * slots;
        const std::size_t end = std::min(a.length, begin + slots);
        out.ciphertexts.push_back(fn(a.ciphertexts[i], v.subspan(begin, end - begin)));
    }
    return out;
}

template <typename Context>
EncryptedVector encrypt_chunks(const Context& ctx, std::span<const double> v, Prng& prng) {
    const std::size_t slots = ctx.params().slot_count();
    EncryptedVector out{v.size(), Layout::slots, 0, {}};
    for (std::size_t begin = 0; begin < v.size(); begin += slots) {
        const std::size_t len = std::min(slots, v.size() - begin);
        out.ciphertexts.push_back(encrypt(ctx, v.subspan(begin, len), prng));
    }
    return out;
}

}  // namespace

EncryptedVector encrypt_vector(const PrivateContext& ctx, std::span<const double> v, Prng& prng) {
    return encrypt_chunks(ctx, v, prng);
}

EncryptedVector encrypt_vector(const PublicContext& ctx, std::span<const double> v, Prng& prng) {
    return encrypt_chunks(ctx, v, prng);
}

std::vector<double> decrypt_vector(const PrivateContext& ctx, const EncryptedVector& ev) {
    std::vector<double> out;
    out.reserve(ev.length);
    if (ev.layout == Layout::coefficients) {
        if (ev.ciphertexts.size() != 1 || ev.stride == 0 || ev.length * ev.stride > ctx.params().poly_degree) {
            throw CkksError("decrypt_vector: malformed coefficient layout");
        }
        const std::vector<double> coeffs = decrypt_coefficients(ctx, ev.ciphertexts[0]);
        for (std::size_t i = 0; i < ev.length; ++i) out.push_back(coeffs[i * ev.stride]);
        return out;
    }
    const std::size_t slots = ctx.params().slot_count();
    if (ev.ciphertexts.size() != (ev.length + slots - 1) / slots) {
        throw CkksError("decrypt_vector: ciphertext count does not match length");
    }
    for (const Ciphertext& ct : ev.ciphertexts) {
        const auto values = decrypt(ctx, ct);
        for (std::size_t i = 0; i < slots && out.size() < ev.length; ++i) out.push_back(values[i].real());
    }
    return out;
}

EncryptedVector add(const PublicContext& ctx, const EncryptedVector& a, const EncryptedVector& b) {
    if (a.length != b.length || a.layout != b.layout || a.stride != b.stride ||
        a.ciphertexts.size() != b.ciphertexts.size()) {
        throw CkksError("add: vectors differ in length or layout");
    }
    EncryptedVector out{a.length, a.layout, a.stride, {}};
    for (std::size_t i = 0; i < a.ciphertexts.size(); ++i) {
        out.ciphertexts.push_back(add(ctx, a.ciphertexts[i], b.ciphertexts[i]));
    }
    return out;
}

EncryptedVector add_plain(const PublicContext& ctx, const EncryptedVector& a, std::span<const double> v) {
    return map_chunks(ctx, a, v, "add_plain",
                      [&](const Ciphertext& ct, std::span<const double> chunk) { return add_plain(ctx, ct, chunk); });
}

EncryptedVector mul_plain(const PublicContext& ctx, const EncryptedVector& a, std::span<const double> v) {
    return map_chunks(ctx, a, v, "mul_plain",
                      [&](const Ciphertext& ct, std::span<const double> chunk) { return mul_plain(ctx, ct, chunk); });
}

EncryptedVector rotate(const PublicContext& ctx, const EncryptedVector& a, long steps) {
    check_slot_layout(a, "rotate");
    EncryptedVector out{a.length, a.layout, a.stride, {}};
    for (const Ciphertext& ct : a.ciphertexts) out.ciphertexts.push_back(rotate(ctx, ct, steps));
    return out;
}

namespace {

/// Merges 2^r pairs whose useful value sits in the constant coefficient
/// into one pair holding item t at coefficient t*N/2^r, scaled by 2^r.
std::optional<PolyPair> pack(const PublicContext& ctx, std::vector<std::optional<PolyPair>> items,
                             std::size_t level) {
    if (items.size() == 1) return std::move(items[0]);
    const ContextData& d = ctx.data();
    const std::size_t n = d.degree();
    const std::size_t r = static_cast<std::size_t>(std::countr_zero(items.size()));
    std::vector<std::optional<PolyPair>> even, odd;
    for (std::size_t i = 0; i < items.size(); ++i) (i % 2 ? odd : even).push_back(std::move(items[i]));
    std::optional<PolyPair> e = pack(ctx, std::move(even), level);
    std::optional<PolyPair> o = pack(ctx, std::move(odd), level);
    if (!e && !o) return std::nullopt;

    const std::size_t shift = n >> r;
    auto shifted = [&](const PolyPair& p) {
        PolyPair s{RnsPoly(n, level + 1), RnsPoly(n, level + 1)};
        for (std::size_t j = 0; j <= level; ++j) {
            detail::monomial_residue(p.c0[j], s.c0[j], shift, d.prime(j));
            detail::monomial_residue(p.c1[j], s.c1[j], shift, d.prime(j));
        }
        return s;
    };
    // Absent items are never read, so their positions may hold anything.
    if (!o) {
        add_into(d, e->c0, e->c0);
        add_into(d, e->c1, e->c1);
        return e;
    }
    PolyPair t = shifted(*o);
    if (!e) {
        add_into(d, t.c0, t.c0);
        add_into(d, t.c1, t.c1);
        return t;
    }
    // (E + X^s O) + sigma(E - X^s O), with sigma fixing multiples of 2N/2^r
    // and negating X^s.
    const std::uint32_t g = r == 1 ? conjugation_element(n) : rotation_element(n, std::size_t{1} << (r - 2));
    PolyPair diff = *e;
    sub_into(d, diff.c0, t.c0);
    sub_into(d, diff.c1, t.c1);
    add_into(d, e->c0, t.c0);
    add_into(d, e->c1, t.c1);
    PolyPair rotated = galois_pair(ctx, diff, level, g);
    add_into(d, e->c0, rotated.c0);
    add_into(d, e->c1, rotated.c1);
    return e;
}

}  // namespace

EncryptedVector vec_matmul_plain(const PublicContext& ctx, const EncryptedVector& a, const Tensor& w,
                                 const Tensor& b) {
    check_slot_layout(a, "vec_matmul_plain");
    if (w.ndim() != 2 || b.ndim() != 1 || b.dim(0) != w.dim(1)) {
        throw CkksError("vec_matmul_plain: expected W [d,k] and b [k], got " + to_string(w.shape()) + " and " +
                        to_string(b.shape()));
    }
    const std::size_t width = w.dim(0);
    const std::size_t classes = w.dim(1);
    if (a.length == 0 || a.length % width != 0) {
        throw CkksError("vec_matmul_plain: input length " + std::to_string(a.length) +
                        " is not a multiple of " + std::to_string(width));
    }
    const ContextData& d = ctx.data();
    const std::size_t n = d.degree();
    const std::size_t slots = d.params().slot_count();
    if (a.ciphertexts.size() != (a.length + slots - 1) / slots) {
        throw CkksError("vec_matmul_plain: ciphertext count does not match length");
    }
    const std::size_t rows = a.length / width;
    const std::size_t outputs = rows * classes;
    if (outputs > n) {
        throw CkksError("vec_matmul_plain: " + std::to_string(outputs) + " outputs exceed ring degree");
    }
    const Ciphertext& first = a.ciphertexts.front();
    for (const Ciphertext& ct : a.ciphertexts) check_same_shape(first, ct);
    const std::size_t level = first.level;
    if (level == 0) throw DepthExceeded();

    const std::size_t tree = std::bit_ceil(outputs);
    const std::size_t r = static_cast<std::size_t>(std::countr_zero(tree));
    const std::size_t stride = n / tree;
    const double ql = static_cast<double>(d.prime(level).value());
    // Leaves carry 2/N of their slot sum in the constant coefficient and the
    // tree multiplies by 2^r, so this plaintext scale leaves q_level * scale.
    const double pt_scale = std::ldexp(ql, static_cast<int>(std::countr_zero(n)) - static_cast<int>(r) - 1);
    const auto ids = level_ids(level);

    std::vector<PolyPair> ntt_inputs;
    for (const Ciphertext& ct : a.ciphertexts) {
        PolyPair p{ct.c0, ct.c1};
        to_ntt(d, p.c0, ids);
        to_ntt(d, p.c1, ids);
        ntt_inputs.push_back(std::move(p));
    }

    std::vector<std::optional<PolyPair>> leaves(tree);
    std::vector<double> mask(slots);
    const auto wd = w.data();
    for (std::size_t row = 0; row < rows; ++row) {
        const std::size_t begin = row * width;
        const std::size_t end = begin + width;
        for (std::size_t col = 0; col < classes; ++col) {
            PolyPair acc{RnsPoly(n, level + 1), RnsPoly(n, level + 1)};
            for (std::size_t chunk = begin / slots; chunk * slots < end; ++chunk) {
                std::fill(mask.begin(), mask.end(), 0.0);
                const std::size_t lo = std::max(begin, chunk * slots);
                const std::size_t hi = std::min(end, (chunk + 1) * slots);
                for (std::size_t g = lo; g < hi; ++g) {
                    mask[g - chunk * slots] = static_cast<double>(wd[(g - begin) * classes + col]);
                }
                RnsPoly pt = detail::encode(d, mask, pt_scale, level);
                to_ntt(d, pt, ids);
                for (std::size_t j = 0; j <= level; ++j) {
                    mul_add_into(acc.c0[j], ntt_inputs[chunk].c0[j], pt[j], d.prime(j));
                    mul_add_into(acc.c1[j], ntt_inputs[chunk].c1[j], pt[j], d.prime(j));
                }
            }
            from_ntt(d, acc.c0, ids);
            from_ntt(d, acc.c1, ids);
            leaves[row * classes + col] = std::move(acc);
        }
    }

    std::optional<PolyPair> packed = pack(ctx, std::move(leaves), level);
    Ciphertext out;
    out.c0 = std::move(packed->c0);
    out.c1 = std::move(packed->c1);
    out.level = level;
    out.scale = first.scale * ql;
    const auto bd = b.data();
    for (std::size_t t = 0; t < outputs; ++t) {
        const double v = std::round(static_cast<double>(bd[t % classes]) * out.scale);
        if (!(std::abs(v) < 0x1.0p62)) throw CkksError("vec_matmul_plain: bias out of range");
        for (std::size_t j = 0; j <= level; ++j) {
            const Modulus& q = d.prime(j);
            out.c0[j][t * stride] = q.add(out.c0[j][t * stride], q.from_signed(static_cast<std::int64_t>(v)));
        }
    }
    rescale(ctx, out);
    return EncryptedVector{outputs, Layout::coefficients, stride, {std::move(out)}};
}

}  // namespace hesplit::ckks
