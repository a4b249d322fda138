#pragma once

#include <cstdint>
#include <span>

#include "ratchetlab/bytes.hpp"

namespace ratchetlab::crypto {

/// Source of key-generation randomness. Implementations throw
/// Error(Errc::generation) when they cannot supply the requested bytes.
class EntropySource {
public:
    virtual ~EntropySource() = default;
    virtual void fill(std::span<std::uint8_t> out) = 0;
};

/// Operating-system CSPRNG (OpenSSL RAND_bytes).
class SystemEntropy final : public EntropySource {
public:
    void fill(std::span<std::uint8_t> out) override;
};

/// Reproducible stream: block i = SHA-256(seed || be64(i)). For simulations and tests only.
class DeterministicEntropy final : public EntropySource {
public:
    explicit DeterministicEntropy(std::uint64_t seed);
    explicit DeterministicEntropy(ByteView seed);
    void fill(std::span<std::uint8_t> out) override;

private:
    void refill();

    Bytes seed_;
    std::uint64_t counter_ = 0;
    ByteArray<32> block_{};
    std::size_t used_ = 32;
};

/// Serves a fixed byte string once, then reports exhaustion.
class FixedEntropy final : public EntropySource {
public:
    explicit FixedEntropy(Bytes bytes) : bytes_(std::move(bytes)) {}
    void fill(std::span<std::uint8_t> out) override;
    std::size_t remaining() const { return bytes_.size() - offset_; }

private:
    Bytes bytes_;
    std::size_t offset_ = 0;
};

}  // namespace ratchetlab::crypto
