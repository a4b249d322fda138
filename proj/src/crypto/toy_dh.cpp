#include "ratchetlab/crypto/toy_dh.hpp"

#include "ratchetlab/error.hpp"

namespace ratchetlab::crypto::toy {

bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    if (n % 2 == 0) return n == 2;
    for (std::uint64_t d = 3; d * d <= n; d += 2)
        if (n % d == 0) return false;
    return true;
}

std::uint64_t mod_pow(std::uint64_t base, std::uint64_t exp, std::uint64_t mod) {
    // mod <= 2^31, so every product fits in 64 bits.
    std::uint64_t result = 1 % mod;
    base %= mod;
    while (exp > 0) {
        if (exp & 1) result = result * base % mod;
        base = base * base % mod;
        exp >>= 1;
    }
    return result;
}

void validate(const ToyDhParams& params) {
    if (params.modulus > kMaxToyModulus) throw Error(Errc::parameter, "toy modulus exceeds 2^31");
    if (!is_prime(params.modulus)) throw Error(Errc::parameter, "toy modulus is not prime");
    if (params.base < 2 || params.base >= params.modulus) throw Error(Errc::parameter, "toy base must satisfy 2 <= B < G");
}

ToyDhResult toy_dh_roundtrip(const ToyDhParams& params, std::uint64_t x, std::uint64_t y) {
    validate(params);
    const auto g = params.modulus;
    if (x < 1 || x >= g - 1 || y < 1 || y >= g - 1) throw Error(Errc::parameter, "toy exponents must be in [1, G-1)");

    ToyDhResult r{};
    r.x_public = mod_pow(params.base, x, g);
    r.y_public = mod_pow(params.base, y, g);
    const auto s_adam = mod_pow(r.y_public, x, g);
    const auto s_bud = mod_pow(r.x_public, y, g);
    if (s_adam != s_bud) throw Error(Errc::internal, "toy DH sides disagree");
    r.shared = s_adam;
    return r;
}

}  // namespace ratchetlab::crypto::toy
