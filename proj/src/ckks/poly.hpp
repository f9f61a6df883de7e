#pragma once

// Polynomial helpers shared by the CKKS translation units.

#include <cstdint>
#include <span>
#include <vector>

#include "hesplit/ckks/ckks.hpp"

namespace hesplit::ckks::detail {

inline constexpr double kNoiseSigma = 3.2;

/// Residues of a small signed polynomial modulo primes 0..count-1, NTT form.
RnsPoly small_to_ntt(const ContextData& d, std::span<const std::int8_t> coeffs, std::size_t count);
std::vector<std::int64_t> sample_gaussian(std::size_t n, Prng& prng);
void sample_uniform(std::span<u64> out, const Modulus& q, Prng& prng);

/// s(X) -> s(X^g) on a small polynomial.
std::vector<std::int8_t> galois_small(std::span<const std::int8_t> s, std::uint32_t g);
/// p(X) -> p(X^g) on one residue in coefficient form.
void galois_residue(std::span<const u64> in, std::span<u64> out, std::uint32_t g, const Modulus& q);
/// p(X) -> X^shift * p(X) on one residue in coefficient form.
void monomial_residue(std::span<const u64> in, std::span<u64> out, std::size_t shift, const Modulus& q);

/// Primes 0..level.
std::vector<std::size_t> level_ids(std::size_t level);
void to_ntt(const ContextData& d, RnsPoly& p, std::span<const std::size_t> ids);
void from_ntt(const ContextData& d, RnsPoly& p, std::span<const std::size_t> ids);

/// round(scale * coefficient) of the slot embedding, reduced modulo primes
/// 0..level, coefficient form.
RnsPoly encode(const ContextData& d, std::span<const double> slots, double scale, std::size_t level);

}  // namespace hesplit::ckks::detail
