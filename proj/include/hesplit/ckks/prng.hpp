#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace hesplit::ckks {

/// ChaCha20 keystream generator. Seeded instances are reproducible; the
/// default-constructed one draws its key from the OS.
class Prng {
public:
    using result_type = std::uint64_t;

    Prng();
    explicit Prng(std::uint64_t seed);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()() { return next_u64(); }

    std::uint64_t next_u64();
    std::uint8_t next_byte();
    /// Uniform in [0, 1) with 53 bits.
    double uniform();
    /// Uniform in [0, bound) by rejection.
    std::uint64_t below(std::uint64_t bound);
    /// Rounded normal with standard deviation sigma, tails cut at 6 sigma.
    std::int64_t gaussian(double sigma);
    /// -1, 0 or 1 with equal probability.
    int ternary();

private:
    void refill();

    std::array<unsigned char, 32> key_{};
    std::uint64_t block_ = 0;
    std::array<unsigned char, 1024> buffer_{};
    std::size_t pos_ = buffer_.size();
};

}  // namespace hesplit::ckks
