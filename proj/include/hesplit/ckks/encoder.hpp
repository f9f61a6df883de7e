#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace hesplit::ckks {

/**
 * Canonical embedding between N/2 complex slots and real polynomials of
 * degree < N. Slot j is the evaluation at zeta^(5^j), zeta = exp(i*pi/N),
 * so the automorphism X -> X^(5^k) rotates slots left by k.
 */
class Encoder {
public:
    explicit Encoder(std::size_t poly_degree);

    std::size_t slot_count() const noexcept { return slots_; }

    /// Coefficients (before rounding) of the polynomial holding the given
    /// slots; missing trailing slots are zero.
    std::vector<double> embed_inverse(std::span<const double> slots) const;
    /// Slot values of a real polynomial.
    std::vector<std::complex<double>> embed(std::span<const double> coeffs) const;

private:
    void special_fft(std::vector<std::complex<double>>& v) const;
    void special_fft_inverse(std::vector<std::complex<double>>& v) const;

    std::size_t n_;
    std::size_t slots_;
    std::vector<std::size_t> rot_group_;
    std::vector<std::complex<double>> ksi_;
};

}  // namespace hesplit::ckks
