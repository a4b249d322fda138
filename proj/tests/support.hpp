#pragma once

#include <memory>

#include "ratchetlab/crypto/entropy.hpp"
#include "ratchetlab/registry.hpp"
#include "ratchetlab/session.hpp"

namespace support {

using namespace ratchetlab;

/// Adam and Bud registered with one server, all randomness from one seed.
struct World {
    explicit World(std::uint64_t seed, std::size_t adam_opks = 10, std::size_t bud_opks = 10)
        : rng(seed), adam("adam", rng), bud("bud", rng) {
        adam.register_with(server, adam_opks, 0);
        bud.register_with(server, bud_opks, 0);
    }
    crypto::DeterministicEntropy rng;
    registry::Registry server;
    session::Account adam;
    session::Account bud;
};

inline crypto::PrivateKey private_from(std::uint8_t fill) {
    ByteArray<32> raw;
    raw.fill(fill);
    return crypto::PrivateKey(raw);
}

}  // namespace support
