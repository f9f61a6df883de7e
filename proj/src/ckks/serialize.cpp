#include "hesplit/ckks/serialize.hpp"

#include <cmath>

namespace hesplit::ckks {

namespace {

void check_version(ByteReader& r) {
    const auto v = r.get<std::uint8_t>();
    if (v != kSerialVersion) {
        r.fail("unsupported version " + std::to_string(v));
    }
}

void read_residues(ByteReader& r, RnsPoly& p, const ContextData& d, std::span<const std::size_t> ids) {
    r.get_u64s(p.raw());
    for (std::size_t k = 0; k < ids.size(); ++k) {
        const u64 q = d.prime(ids[k]).value();
        for (u64 v : p[k]) {
            if (v >= q) r.fail("residue out of range");
        }
    }
}

}  // namespace

std::size_t ciphertext_bytes(std::size_t poly_degree, std::size_t level) {
    return 1 + 4 + 4 + 8 + 2 * (level + 1) * poly_degree * 8;
}

void write(ByteWriter& w, const Ciphertext& ct) {
    w.put<std::uint8_t>(kSerialVersion);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(ct.c0.degree()));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(ct.level));
    w.put<double>(ct.scale);
    w.put_u64s(ct.c0.raw());
    w.put_u64s(ct.c1.raw());
}

void write(ByteWriter& w, const EncryptedVector& ev) {
    w.put<std::uint8_t>(kSerialVersion);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(ev.layout));
    w.put<std::uint64_t>(ev.length);
    w.put<std::uint64_t>(ev.stride);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(ev.ciphertexts.size()));
    for (const Ciphertext& ct : ev.ciphertexts) write(w, ct);
}

Bytes serialize(const Ciphertext& ct) {
    Bytes out;
    out.reserve(ciphertext_bytes(ct.c0.degree(), ct.level));
    ByteWriter w(out);
    write(w, ct);
    return out;
}

Bytes serialize(const EncryptedVector& ev) {
    Bytes out;
    ByteWriter w(out);
    write(w, ev);
    return out;
}

Ciphertext read_ciphertext(ByteReader& r, const PublicContext& ctx) {
    check_version(r);
    const ContextData& d = ctx.data();
    const auto n = r.get<std::uint32_t>();
    if (n != d.degree()) r.fail("ring degree " + std::to_string(n) + " does not match context");
    const auto level = r.get<std::uint32_t>();
    if (level > d.top_level()) r.fail("level " + std::to_string(level) + " out of range");
    Ciphertext ct;
    ct.level = level;
    ct.scale = r.get<double>();
    if (!std::isfinite(ct.scale) || ct.scale <= 0.0) r.fail("invalid scale");
    const auto ids = [&] {
        std::vector<std::size_t> v(level + 1);
        for (std::size_t i = 0; i <= level; ++i) v[i] = i;
        return v;
    }();
    ct.c0 = RnsPoly(n, level + 1);
    ct.c1 = RnsPoly(n, level + 1);
    read_residues(r, ct.c0, d, ids);
    read_residues(r, ct.c1, d, ids);
    return ct;
}

EncryptedVector read_encrypted_vector(ByteReader& r, const PublicContext& ctx) {
    check_version(r);
    EncryptedVector ev;
    const auto layout = r.get<std::uint8_t>();
    if (layout > 1) r.fail("unknown layout " + std::to_string(layout));
    ev.layout = static_cast<Layout>(layout);
    ev.length = r.get<std::uint64_t>();
    ev.stride = r.get<std::uint64_t>();
    const auto count = r.get<std::uint32_t>();
    const std::size_t n = ctx.params().poly_degree;
    const std::size_t slots = n / 2;
    if (ev.layout == Layout::slots) {
        if (ev.stride != 0 || count != (ev.length + slots - 1) / slots) r.fail("inconsistent slot layout");
    } else if (count != 1 || ev.stride == 0 || ev.length > n / ev.stride) {
        r.fail("inconsistent coefficient layout");
    }
    if (count > r.remaining() / ciphertext_bytes(n, 0)) r.fail("truncated");
    for (std::uint32_t i = 0; i < count; ++i) ev.ciphertexts.push_back(read_ciphertext(r, ctx));
    return ev;
}

Ciphertext deserialize_ciphertext(std::span<const std::uint8_t> bytes, const PublicContext& ctx) {
    ByteReader r(bytes, "ciphertext");
    Ciphertext ct = read_ciphertext(r, ctx);
    r.expect_done();
    return ct;
}

EncryptedVector deserialize_encrypted_vector(std::span<const std::uint8_t> bytes, const PublicContext& ctx) {
    ByteReader r(bytes, "encrypted vector");
    EncryptedVector ev = read_encrypted_vector(r, ctx);
    r.expect_done();
    return ev;
}

Bytes serialize(const PublicContext& ctx) {
    Bytes out;
    ByteWriter w(out);
    const CkksParams& p = ctx.params();
    const ContextData& d = ctx.data();
    w.put<std::uint8_t>(kSerialVersion);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(p.poly_degree));
    w.put<std::uint8_t>(static_cast<std::uint8_t>(p.coeff_bits.size()));
    for (int b : p.coeff_bits) w.put<std::uint8_t>(static_cast<std::uint8_t>(b));
    w.put<std::uint8_t>(static_cast<std::uint8_t>(p.log_scale));
    for (const Modulus& q : d.primes()) w.put<std::uint64_t>(q.value());
    w.put_u64s(ctx.public_key().b.raw());
    w.put_u64s(ctx.public_key().a.raw());
    w.put<std::uint32_t>(static_cast<std::uint32_t>(ctx.galois_keys().size()));
    for (const auto& [element, key] : ctx.galois_keys()) {
        w.put<std::uint32_t>(element);
        w.put<std::uint32_t>(static_cast<std::uint32_t>(key.b.size()));
        for (std::size_t i = 0; i < key.b.size(); ++i) {
            w.put_u64s(key.b[i].raw());
            w.put_u64s(key.a[i].raw());
        }
    }
    return out;
}

PublicContext deserialize_public_context(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes, "public context");
    check_version(r);
    CkksParams p;
    p.poly_degree = r.get<std::uint32_t>();
    const auto count = r.get<std::uint8_t>();
    for (std::uint8_t i = 0; i < count; ++i) p.coeff_bits.push_back(r.get<std::uint8_t>());
    p.log_scale = r.get<std::uint8_t>();
    try {
        p.validate();
    } catch (const UnsupportedParams& e) {
        r.fail(e.what());
    }
    auto data = std::make_shared<const ContextData>(p);
    const ContextData& d = *data;
    for (const Modulus& q : d.primes()) {
        if (r.get<std::uint64_t>() != q.value()) r.fail("prime chain does not match parameters");
    }
    const std::size_t n = d.degree();
    const std::size_t L = d.data_prime_count();
    std::vector<std::size_t> data_ids(L), all_ids(L + 1);
    for (std::size_t i = 0; i <= L; ++i) {
        if (i < L) data_ids[i] = i;
        all_ids[i] = i;
    }
    PublicKey pk{RnsPoly(n, L), RnsPoly(n, L)};
    read_residues(r, pk.b, d, data_ids);
    read_residues(r, pk.a, d, data_ids);
    GaloisKeys galois;
    const auto keys = r.get<std::uint32_t>();
    if (keys > 64) r.fail("too many Galois keys");
    const std::size_t digits_expected = d.digit_count(d.top_level());
    for (std::uint32_t k = 0; k < keys; ++k) {
        const auto element = r.get<std::uint32_t>();
        if (element % 2 == 0 || element >= 2 * n) r.fail("invalid Galois element");
        const auto digits = r.get<std::uint32_t>();
        if (digits != digits_expected) r.fail("unexpected digit count");
        KSwitchKey key;
        for (std::uint32_t i = 0; i < digits; ++i) {
            RnsPoly b(n, L + 1), a(n, L + 1);
            read_residues(r, b, d, all_ids);
            read_residues(r, a, d, all_ids);
            key.b.push_back(std::move(b));
            key.a.push_back(std::move(a));
        }
        if (!galois.emplace(element, std::move(key)).second) r.fail("duplicate Galois element");
    }
    r.expect_done();
    return PublicContext(std::move(data), std::move(pk), std::move(galois));
}

}  // namespace hesplit::ckks
