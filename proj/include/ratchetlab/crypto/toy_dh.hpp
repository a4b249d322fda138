#pragma once

#include <cstdint>

namespace ratchetlab::crypto::toy {

// Small-modulus finite-field Diffie-Hellman, for reproducing the textbook
// exchange only. Nothing here is ever used as key material.

struct ToyDhParams {
    std::uint64_t base;
    std::uint64_t modulus;
};

struct ToyDhResult {
    std::uint64_t x_public;  // B^x mod G
    std::uint64_t y_public;  // B^y mod G
    std::uint64_t shared;    // B^(xy) mod G
};

inline constexpr std::uint64_t kMaxToyModulus = 1ull << 31;

bool is_prime(std::uint64_t n);

std::uint64_t mod_pow(std::uint64_t base, std::uint64_t exp, std::uint64_t mod);

/// Throws Error(Errc::parameter) for a composite or oversized modulus, base >= modulus,
/// or exponents outside [1, G-1).
void validate(const ToyDhParams& params);

ToyDhResult toy_dh_roundtrip(const ToyDhParams& params, std::uint64_t x, std::uint64_t y);

}  // namespace ratchetlab::crypto::toy
