#include "hesplit/ckks/params.hpp"

#include <cmath>
#include <numeric>

namespace hesplit::ckks {

double CkksParams::scale() const { return std::ldexp(1.0, log_scale); }

int security_budget_bits(std::size_t poly_degree) {
    switch (poly_degree) {
        case 1024: return 27;
        case 2048: return 54;
        case 4096: return 109;
        case 8192: return 218;
        case 16384: return 438;
        default: return 0;
    }
}

void CkksParams::validate() const {
    if (poly_degree != 2048 && poly_degree != 4096 && poly_degree != 8192) {
        throw UnsupportedParams("ckks: unsupported polynomial degree " + std::to_string(poly_degree));
    }
    if (coeff_bits.size() < 3) {
        throw UnsupportedParams("ckks: need at least two data primes and a special prime");
    }
    for (int b : coeff_bits) {
        if (b < 14 || b > 60) {
            throw UnsupportedParams("ckks: prime bit length " + std::to_string(b) + " out of range");
        }
    }
    const int total = std::accumulate(coeff_bits.begin(), coeff_bits.end(), 0);
    if (total > security_budget_bits(poly_degree)) {
        throw UnsupportedParams("ckks: " + std::to_string(total) + " modulus bits exceed the " +
                                std::to_string(security_budget_bits(poly_degree)) + "-bit budget for N=" +
                                std::to_string(poly_degree));
    }
    const int data_bits = total - coeff_bits.back();
    if (data_bits > 120) {
        throw UnsupportedParams("ckks: data modulus wider than 120 bits");
    }
    if (log_scale < 8 || log_scale >= coeff_bits.front()) {
        throw UnsupportedParams("ckks: scale 2^" + std::to_string(log_scale) +
                                " must lie below the first prime (" +
                                std::to_string(coeff_bits.front()) + " bits)");
    }
}

CkksParams preset(std::string_view name) {
    if (name == "p8192a") return {8192, {40, 21, 21, 40}, 21};
    if (name == "p4096a") return {4096, {40, 20, 20}, 21};
    if (name == "p4096b") return {4096, {40, 20, 40}, 20};
    if (name == "p2048") return {2048, {18, 18, 18}, 16};
    throw UnsupportedParams("ckks: unknown preset '" + std::string(name) + "'");
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"p8192a", "p4096a", "p4096b", "p2048"};
    return names;
}

}  // namespace hesplit::ckks
