#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hesplit::ckks {

class UnsupportedParams : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/**
 * Ring degree, prime bit lengths and scaling factor.
 *
 * coeff_bits lists the data primes q0..q(L-1) followed by one special prime
 * used only for key switching, so a chain of k entries gives k-2 rescales.
 */
struct CkksParams {
    std::size_t poly_degree = 0;
    std::vector<int> coeff_bits;
    int log_scale = 0;  ///< scaling factor is 2^log_scale

    std::size_t slot_count() const noexcept { return poly_degree / 2; }
    std::size_t data_prime_count() const noexcept { return coeff_bits.size() - 1; }
    std::size_t depth() const noexcept { return coeff_bits.size() - 2; }
    double scale() const;

    /// Throws UnsupportedParams on degrees outside {2048, 4096, 8192}, a total
    /// modulus beyond the 128-bit security budget, or a scale that does not fit
    /// under the lowest data prime.
    void validate() const;

    bool operator==(const CkksParams&) const = default;
};

/// Largest total modulus bit count with 128-bit classical security.
int security_budget_bits(std::size_t poly_degree);

/// p8192a, p4096a, p4096b, p2048.
CkksParams preset(std::string_view name);
const std::vector<std::string>& preset_names();

}  // namespace hesplit::ckks
