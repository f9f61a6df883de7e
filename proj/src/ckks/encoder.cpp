#include "hesplit/ckks/encoder.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hesplit::ckks {

namespace {

void bit_reverse_permute(std::vector<std::complex<double>>& v) {
    const std::size_t n = v.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(v[i], v[j]);
    }
}

}  // namespace

Encoder::Encoder(std::size_t poly_degree) : n_(poly_degree), slots_(poly_degree / 2) {
    if (poly_degree < 4 || !std::has_single_bit(poly_degree)) {
        throw std::invalid_argument("Encoder: degree must be a power of two");
    }
    const std::size_t m = 2 * n_;
    rot_group_.resize(slots_);
    std::size_t g = 1;
    for (std::size_t j = 0; j < slots_; ++j) {
        rot_group_[j] = g;
        g = g * 5 % m;
    }
    ksi_.resize(m + 1);
    for (std::size_t k = 0; k <= m; ++k) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(m);
        ksi_[k] = {std::cos(angle), std::sin(angle)};
    }
}

void Encoder::special_fft(std::vector<std::complex<double>>& v) const {
    const std::size_t size = v.size();
    const std::size_t m = 2 * n_;
    bit_reverse_permute(v);
    for (std::size_t len = 2; len <= size; len <<= 1) {
        const std::size_t lenh = len >> 1;
        const std::size_t lenq = len << 2;
        const std::size_t gap = m / lenq;
        for (std::size_t i = 0; i < size; i += len) {
            for (std::size_t j = 0; j < lenh; ++j) {
                const std::size_t idx = (rot_group_[j] % lenq) * gap;
                const std::complex<double> u = v[i + j];
                const std::complex<double> w = v[i + j + lenh] * ksi_[idx];
                v[i + j] = u + w;
                v[i + j + lenh] = u - w;
            }
        }
    }
}

void Encoder::special_fft_inverse(std::vector<std::complex<double>>& v) const {
    const std::size_t size = v.size();
    const std::size_t m = 2 * n_;
    for (std::size_t len = size; len >= 2; len >>= 1) {
        const std::size_t lenh = len >> 1;
        const std::size_t lenq = len << 2;
        const std::size_t gap = m / lenq;
        for (std::size_t i = 0; i < size; i += len) {
            for (std::size_t j = 0; j < lenh; ++j) {
                const std::size_t idx = (lenq - (rot_group_[j] % lenq)) * gap;
                const std::complex<double> u = v[i + j] + v[i + j + lenh];
                const std::complex<double> w = (v[i + j] - v[i + j + lenh]) * ksi_[idx];
                v[i + j] = u;
                v[i + j + lenh] = w;
            }
        }
    }
    bit_reverse_permute(v);
    const double inv = 1.0 / static_cast<double>(size);
    for (auto& x : v) x *= inv;
}

std::vector<double> Encoder::embed_inverse(std::span<const double> slots) const {
    if (slots.size() > slots_) {
        throw std::invalid_argument("Encoder: " + std::to_string(slots.size()) + " values exceed " +
                                    std::to_string(slots_) + " slots");
    }
    std::vector<std::complex<double>> v(slots_);
    for (std::size_t i = 0; i < slots.size(); ++i) v[i] = slots[i];
    special_fft_inverse(v);
    std::vector<double> coeffs(n_);
    for (std::size_t i = 0; i < slots_; ++i) {
        coeffs[i] = v[i].real();
        coeffs[i + slots_] = v[i].imag();
    }
    return coeffs;
}

std::vector<std::complex<double>> Encoder::embed(std::span<const double> coeffs) const {
    if (coeffs.size() != n_) {
        throw std::invalid_argument("Encoder: expected " + std::to_string(n_) + " coefficients");
    }
    std::vector<std::complex<double>> v(slots_);
    for (std::size_t i = 0; i < slots_; ++i) v[i] = {coeffs[i], coeffs[i + slots_]};
    special_fft(v);
    return v;
}

}  // namespace hesplit::ckks
