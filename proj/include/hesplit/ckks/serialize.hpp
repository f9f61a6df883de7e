#pragma once

#include <cstdint>
#include <span>

#include "hesplit/bytes.hpp"
#include "hesplit/ckks/ckks.hpp"

namespace hesplit::ckks {

/**
 * Canonical little-endian encodings, each starting with a version byte.
 *
 *   Ciphertext      : ver u8 | N u32 | level u32 | scale f64 | c0, c1 residues u64[(level+1)*N]
 *   EncryptedVector : ver u8 | layout u8 | length u64 | stride u64 | count u32 | Ciphertext*
 *   PublicContext   : ver u8 | N u32 | nprimes u8 | bits u8[] | log_scale u8 | primes u64[]
 *                     | pk b, a | nkeys u32 | (element u32 | ndigits u32 | (b, a)*)*
 *
 * Residues are checked against their prime on input.
 */
inline constexpr std::uint8_t kSerialVersion = 1;

void write(ByteWriter& w, const Ciphertext& ct);
void write(ByteWriter& w, const EncryptedVector& ev);
Bytes serialize(const Ciphertext& ct);
Bytes serialize(const EncryptedVector& ev);
Bytes serialize(const PublicContext& ctx);

Ciphertext read_ciphertext(ByteReader& r, const PublicContext& ctx);
EncryptedVector read_encrypted_vector(ByteReader& r, const PublicContext& ctx);
Ciphertext deserialize_ciphertext(std::span<const std::uint8_t> bytes, const PublicContext& ctx);
EncryptedVector deserialize_encrypted_vector(std::span<const std::uint8_t> bytes, const PublicContext& ctx);
PublicContext deserialize_public_context(std::span<const std::uint8_t> bytes);

/// Encoded size of one ciphertext at the given level.
std::size_t ciphertext_bytes(std::size_t poly_degree, std::size_t level);

}  // namespace hesplit::ckks
