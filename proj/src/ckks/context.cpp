#include <bit>
#include <cmath>

#include "hesplit/ckks/ckks.hpp"
#include "poly.hpp"

namespace hesplit::ckks {

ContextData::ContextData(CkksParams params)
    : params_(std::move(params)), encoder_((params_.validate(), params_.poly_degree)) {
    const std::size_t n = params_.poly_degree;
    for (u64 q : generate_primes(params_.coeff_bits, n)) {
        moduli_.emplace_back(q);
        ntt_.emplace_back(n, moduli_.back());
    }
    const Modulus& p = moduli_.back();
    gadget_bits_ = (p.bits() + 1) / 2;

    const std::size_t L = data_prime_count();
    rescale_inv_.resize(L);
    for (std::size_t last = 0; last < L; ++last) {
        for (std::size_t j = 0; j < last; ++j) {
            rescale_inv_[last].push_back(moduli_[j].inv(moduli_[last].value() % moduli_[j].value()));
        }
    }
    for (std::size_t j = 0; j < L; ++j) {
        special_mod_.push_back(p.value() % moduli_[j].value());
        special_inv_.push_back(moduli_[j].inv(special_mod_.back()));
    }
}

std::size_t ContextData::digits_of_prime(std::size_t i) const {
    return static_cast<std::size_t>((prime(i).bits() + gadget_bits_ - 1) / gadget_bits_);
}

std::size_t ContextData::digit_count(std::size_t level) const {
    std::size_t total = 0;
    for (std::size_t i = 0; i <= level; ++i) total += digits_of_prime(i);
    return total;
}

namespace {

thread_local std::size_t t_secret_keys = 0;

}  // namespace

std::size_t secret_key_constructions() noexcept { return t_secret_keys; }

SecretKey::SecretKey(std::vector<std::int8_t> coeffs) : s_(std::move(coeffs)) { ++t_secret_keys; }
SecretKey::SecretKey(const SecretKey& other) : s_(other.s_) { ++t_secret_keys; }
SecretKey::SecretKey(SecretKey&& other) noexcept : s_(std::move(other.s_)) { ++t_secret_keys; }
SecretKey::~SecretKey() {
    // Wipe before release.
    volatile std::int8_t* p = s_.data();
    for (std::size_t i = 0; i < s_.size(); ++i) p[i] = 0;
}

std::uint32_t rotation_element(std::size_t poly_degree, std::size_t step) {
    const u64 m = 2 * poly_degree;
    u64 g = 1, base = 5;
    for (std::size_t e = step % (poly_degree / 2); e; e >>= 1) {
        if (e & 1) g = g * base % m;
        base = base * base % m;
    }
    return static_cast<std::uint32_t>(g);
}

std::uint32_t conjugation_element(std::size_t poly_degree) {
    return static_cast<std::uint32_t>(2 * poly_degree - 1);
}

PublicContext::PublicContext(std::shared_ptr<const ContextData> data, PublicKey pk, GaloisKeys galois)
    : data_(std::move(data)),
      pk_(std::make_shared<const PublicKey>(std::move(pk))),
      galois_(std::make_shared<const GaloisKeys>(std::move(galois))) {}

const KSwitchKey& PublicContext::galois_key(std::uint32_t element) const {
    auto it = galois_->find(element);
    if (it == galois_->end()) {
        throw CkksError("no key for Galois element " + std::to_string(element));
    }
    return it->second;
}

PrivateContext::PrivateContext(PublicContext pub, SecretKey sk)
    : PublicContext(std::move(pub)), sk_(std::make_shared<const SecretKey>(std::move(sk))) {}

PublicContext to_public(const PrivateContext& ctx) { return static_cast<const PublicContext&>(ctx); }

namespace {

KSwitchKey make_switch_key(const ContextData& d, const RnsPoly& s_ntt,
                           std::span<const std::int8_t> target, Prng& prng) {
    const std::size_t n = d.degree();
    const std::size_t L = d.data_prime_count();
    const std::size_t all = L + 1;
    RnsPoly t_ntt = detail::small_to_ntt(d, target, all);
    KSwitchKey key;
    const int w = d.gadget_bits();
    for (std::size_t i = 0; i < L; ++i) {
        const Modulus& qi = d.prime(i);
        for (std::size_t k = 0; k < d.digits_of_prime(i); ++k) {
            RnsPoly a(n, all), b(n, all);
            const std::vector<std::int64_t> e = detail::sample_gaussian(n, prng);
            const u64 factor = qi.mul(d.special_residue(i), qi.pow(2, static_cast<u64>(w) * k));
            for (std::size_t j = 0; j < all; ++j) {
                const Modulus& q = d.prime(j);
                detail::sample_uniform(a[j], q, prng);
                auto bj = b[j];
                for (std::size_t c = 0; c < n; ++c) bj[c] = q.from_signed(e[c]);
                d.ntt(j).forward(bj);
                const auto aj = a[j];
                const auto sj = s_ntt[j];
                const auto tj = t_ntt[j];
                for (std::size_t c = 0; c < n; ++c) {
                    u64 v = q.sub(bj[c], q.mul(aj[c], sj[c]));
                    if (j == i) v = q.add(v, q.mul(factor, tj[c]));
                    bj[c] = v;
                }
            }
            key.b.push_back(std::move(b));
            key.a.push_back(std::move(a));
        }
    }
    return key;
}

}  // namespace

PrivateContext keygen(const CkksParams& params, std::uint64_t seed) {
    auto data = std::make_shared<const ContextData>(params);
    const ContextData& d = *data;
    const std::size_t n = d.degree();
    Prng prng(seed);

    std::vector<std::int8_t> s(n);
    for (auto& v : s) v = static_cast<std::int8_t>(prng.ternary());
    SecretKey sk(std::move(s));
    const std::size_t L = d.data_prime_count();
    RnsPoly s_ntt = detail::small_to_ntt(d, sk.coefficients(), L + 1);

    PublicKey pk{RnsPoly(n, L), RnsPoly(n, L)};
    const std::vector<std::int64_t> e = detail::sample_gaussian(n, prng);
    for (std::size_t j = 0; j < L; ++j) {
        const Modulus& q = d.prime(j);
        detail::sample_uniform(pk.a[j], q, prng);
        auto bj = pk.b[j];
        for (std::size_t c = 0; c < n; ++c) bj[c] = q.from_signed(e[c]);
        d.ntt(j).forward(bj);
        const auto aj = pk.a[j];
        const auto sj = s_ntt[j];
        for (std::size_t c = 0; c < n; ++c) bj[c] = q.sub(bj[c], q.mul(aj[c], sj[c]));
    }

    GaloisKeys galois;
    std::vector<std::uint32_t> elements{conjugation_element(n)};
    for (std::size_t step = 1; step < n / 2; step <<= 1) elements.push_back(rotation_element(n, step));
    for (std::uint32_t g : elements) {
        const std::vector<std::int8_t> target = detail::galois_small(sk.coefficients(), g);
        galois.emplace(g, make_switch_key(d, s_ntt, target, prng));
    }
    return PrivateContext(PublicContext(std::move(data), std::move(pk), std::move(galois)), std::move(sk));
}

}  // namespace hesplit::ckks
