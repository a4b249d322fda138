#include "ratchetlab/crypto/entropy.hpp"

#include <openssl/rand.h>

#include <algorithm>

#include "ratchetlab/crypto/primitives.hpp"
#include "ratchetlab/error.hpp"

namespace ratchetlab::crypto {

void SystemEntropy::fill(std::span<std::uint8_t> out) {
    if (out.empty()) return;
    if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1)
        throw Error(Errc::generation, "system entropy source failed");
}

DeterministicEntropy::DeterministicEntropy(std::uint64_t seed) {
    for (int i = 7; i >= 0; --i) seed_.push_back(static_cast<std::uint8_t>(seed >> (8 * i)));
}

DeterministicEntropy::DeterministicEntropy(ByteView seed) : seed_(seed.begin(), seed.end()) {}

void DeterministicEntropy::refill() {
    Bytes input = seed_;
    for (int i = 7; i >= 0; --i) input.push_back(static_cast<std::uint8_t>(counter_ >> (8 * i)));
    ++counter_;
    block_ = sha256(input);
    used_ = 0;
}

void DeterministicEntropy::fill(std::span<std::uint8_t> out) {
    std::size_t written = 0;
    while (written < out.size()) {
        if (used_ == block_.size()) refill();
        std::size_t n = std::min(out.size() - written, block_.size() - used_);
        std::copy_n(block_.begin() + static_cast<std::ptrdiff_t>(used_), n, out.begin() + static_cast<std::ptrdiff_t>(written));
        used_ += n;
        written += n;
    }
}

void FixedEntropy::fill(std::span<std::uint8_t> out) {
    if (out.size() > remaining()) throw Error(Errc::generation, "entropy exhausted");
    std::copy_n(bytes_.begin() + static_cast<std::ptrdiff_t>(offset_), out.size(), out.begin());
    offset_ += out.size();
}

}  // namespace ratchetlab::crypto
