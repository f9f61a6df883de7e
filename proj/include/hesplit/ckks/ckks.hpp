#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "hesplit/ckks/arith.hpp"
#include "hesplit/ckks/encoder.hpp"
#include "hesplit/ckks/params.hpp"
#include "hesplit/ckks/prng.hpp"
#include "hesplit/tensor.hpp"

namespace hesplit::ckks {

class CkksError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// No prime left to rescale by: the parameter set is too shallow.
class DepthExceeded : public CkksError {
public:
    DepthExceeded() : CkksError("multiplicative depth exceeded") {}
};

/// Residues of one polynomial modulo several primes, stored prime-major.
class RnsPoly {
public:
    RnsPoly() = default;
    RnsPoly(std::size_t degree, std::size_t primes)
        : degree_(degree), primes_(primes), data_(degree * primes, 0) {}

    std::size_t degree() const noexcept { return degree_; }
    std::size_t primes() const noexcept { return primes_; }
    std::span<u64> operator[](std::size_t i) { return {data_.data() + i * degree_, degree_}; }
    std::span<const u64> operator[](std::size_t i) const { return {data_.data() + i * degree_, degree_}; }
    std::span<u64> raw() noexcept { return data_; }
    std::span<const u64> raw() const noexcept { return data_; }
    void drop_last() {
        --primes_;
        data_.resize(degree_ * primes_);
    }

    bool operator==(const RnsPoly&) const = default;

private:
    std::size_t degree_ = 0;
    std::size_t primes_ = 0;
    std::vector<u64> data_;
};

/// Primes, NTT tables and constants for one parameter set; immutable and
/// shared by every context built from it.
class ContextData {
public:
    explicit ContextData(CkksParams params);

    const CkksParams& params() const noexcept { return params_; }
    std::size_t degree() const noexcept { return params_.poly_degree; }
    std::size_t data_prime_count() const noexcept { return moduli_.size() - 1; }
    std::size_t special_index() const noexcept { return moduli_.size() - 1; }
    std::size_t top_level() const noexcept { return data_prime_count() - 1; }
    const Modulus& prime(std::size_t i) const { return moduli_.at(i); }
    const std::vector<Modulus>& primes() const noexcept { return moduli_; }
    const NttTables& ntt(std::size_t i) const { return ntt_.at(i); }
    const Encoder& encoder() const noexcept { return encoder_; }

    /// Key switching splits each residue into base-2^w digits.
    int gadget_bits() const noexcept { return gadget_bits_; }
    std::size_t digits_of_prime(std::size_t i) const;
    std::size_t digit_count(std::size_t level) const;

    /// q_last^-1 mod q_j.
    u64 rescale_factor(std::size_t last, std::size_t j) const { return rescale_inv_.at(last).at(j); }
    /// Special prime P^-1 mod q_j and P mod q_j.
    u64 special_inverse(std::size_t j) const { return special_inv_.at(j); }
    u64 special_residue(std::size_t j) const { return special_mod_.at(j); }

private:
    CkksParams params_;
    std::vector<Modulus> moduli_;
    std::vector<NttTables> ntt_;
    Encoder encoder_;
    int gadget_bits_ = 0;
    std::vector<std::vector<u64>> rescale_inv_;
    std::vector<u64> special_inv_;
    std::vector<u64> special_mod_;
};

/// Number of SecretKey objects constructed on the calling thread.
std::size_t secret_key_constructions() noexcept;

/// Uniform ternary secret polynomial.
class SecretKey {
public:
    explicit SecretKey(std::vector<std::int8_t> coeffs);
    SecretKey(const SecretKey& other);
    SecretKey(SecretKey&& other) noexcept;
    SecretKey& operator=(const SecretKey&) = default;
    SecretKey& operator=(SecretKey&&) noexcept = default;
    ~SecretKey();

    std::span<const std::int8_t> coefficients() const noexcept { return s_; }

private:
    std::vector<std::int8_t> s_;
};

/// (b, a) = (-a*s + e, a) over the data primes, NTT form.
struct PublicKey {
    RnsPoly b;
    RnsPoly a;
    bool operator==(const PublicKey&) const = default;
};

/// One (b, a) pair per gadget digit, over data primes plus the special prime.
struct KSwitchKey {
    std::vector<RnsPoly> b;
    std::vector<RnsPoly> a;
    bool operator==(const KSwitchKey&) const = default;
};

using GaloisKeys = std::map<std::uint32_t, KSwitchKey>;

/// Galois element rotating slots left by step: 5^step mod 2N.
std::uint32_t rotation_element(std::size_t poly_degree, std::size_t step);
/// X -> X^(2N-1), complex conjugation of every slot.
std::uint32_t conjugation_element(std::size_t poly_degree);

/// Parameters and evaluation keys. Holds no secret and cannot decrypt.
class PublicContext {
public:
    PublicContext(std::shared_ptr<const ContextData> data, PublicKey pk, GaloisKeys galois);

    const CkksParams& params() const noexcept { return data_->params(); }
    const ContextData& data() const noexcept { return *data_; }
    const PublicKey& public_key() const noexcept { return *pk_; }
    const GaloisKeys& galois_keys() const noexcept { return *galois_; }
    const KSwitchKey& galois_key(std::uint32_t element) const;
    bool is_private() const noexcept { return false; }

private:
    std::shared_ptr<const ContextData> data_;
    std::shared_ptr<const PublicKey> pk_;
    std::shared_ptr<const GaloisKeys> galois_;
};

/// Public context plus the secret key.
class PrivateContext : public PublicContext {
public:
    PrivateContext(PublicContext pub, SecretKey sk);

    const SecretKey& secret_key() const noexcept { return *sk_; }
    bool is_private() const noexcept { return true; }

private:
    std::shared_ptr<const SecretKey> sk_;
};

/// Fresh key material for params; reproducible for a given seed. Rotation
/// keys cover every power-of-two step plus conjugation.
PrivateContext keygen(const CkksParams& params, std::uint64_t seed);
PublicContext to_public(const PrivateContext& ctx);

/// (c0, c1) in coefficient form over primes q0..q_level, decrypting to
/// c0 + c1*s = scale * message.
struct Ciphertext {
    RnsPoly c0;
    RnsPoly c1;
    std::size_t level = 0;
    double scale = 1.0;
    bool operator==(const Ciphertext&) const = default;
};

enum class Layout : std::uint8_t {
    /// Value i sits in slot i mod N/2 of ciphertext i / (N/2).
    slots = 0,
    /// One ciphertext; value i is coefficient i*stride divided by the scale.
    coefficients = 1,
};

/// A logical vector of reals spread over one or more ciphertexts.
struct EncryptedVector {
    std::size_t length = 0;
    Layout layout = Layout::slots;
    std::size_t stride = 0;
    std::vector<Ciphertext> ciphertexts;

    bool operator==(const EncryptedVector&) const = default;
};

/// Symmetric encryption with the secret key (lower fresh noise).
Ciphertext encrypt(const PrivateContext& ctx, std::span<const double> slots, Prng& prng);
/// Public-key encryption.
Ciphertext encrypt(const PublicContext& ctx, std::span<const double> slots, Prng& prng);
std::vector<std::complex<double>> decrypt(const PrivateContext& ctx, const Ciphertext& ct);
/// All N coefficients of the decrypted plaintext divided by the scale.
std::vector<double> decrypt_coefficients(const PrivateContext& ctx, const Ciphertext& ct);

/// Packs v row-major into ceil(len / (N/2)) ciphertexts.
EncryptedVector encrypt_vector(const PrivateContext& ctx, std::span<const double> v, Prng& prng);
EncryptedVector encrypt_vector(const PublicContext& ctx, std::span<const double> v, Prng& prng);
std::vector<double> decrypt_vector(const PrivateContext& ctx, const EncryptedVector& ev);

// Ciphertext-level operations.
Ciphertext add(const PublicContext& ctx, const Ciphertext& a, const Ciphertext& b);
Ciphertext add_plain(const PublicContext& ctx, const Ciphertext& a, std::span<const double> slots);
/// Slotwise product with a plaintext, encoded at the scale of the prime that
/// the following rescale drops, so the scale is unchanged afterwards.
Ciphertext mul_plain(const PublicContext& ctx, const Ciphertext& a, std::span<const double> slots);
void rescale(const PublicContext& ctx, Ciphertext& ct);
/// X -> X^element followed by key switching back to s.
Ciphertext apply_galois(const PublicContext& ctx, const Ciphertext& ct, std::uint32_t element);
Ciphertext rotate(const PublicContext& ctx, const Ciphertext& ct, long steps);

// Vector-level operations (slot layout).
EncryptedVector add(const PublicContext& ctx, const EncryptedVector& a, const EncryptedVector& b);
EncryptedVector add_plain(const PublicContext& ctx, const EncryptedVector& a, std::span<const double> v);
EncryptedVector mul_plain(const PublicContext& ctx, const EncryptedVector& a, std::span<const double> v);
/// Rotates every ciphertext of the vector left by steps slots.
EncryptedVector rotate(const PublicContext& ctx, const EncryptedVector& a, long steps);

/**
 * Row vectors times a plaintext matrix: the input holds n rows of width d
 * (n*d values, slot layout), W is [d, k] and b is [k]. Returns the n*k
 * results row-major in coefficient layout, one level lower.
 *
 * Each (row, column) product is a masked slotwise multiply; its dot product
 * lands in the constant coefficient. The products are merged into a single
 * ciphertext by a binary tree of automorphisms, one key switch per merge.
 * Results must stay below q0 / (2 * scale) in magnitude.
 */
EncryptedVector vec_matmul_plain(const PublicContext& ctx, const EncryptedVector& a, const Tensor& w,
                                 const Tensor& b);

}  // namespace hesplit::ckks
