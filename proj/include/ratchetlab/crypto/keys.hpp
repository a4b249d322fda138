#pragma once

#include <compare>
#include <cstddef>
#include <functional>

#include "ratchetlab/bytes.hpp"
#include "ratchetlab/crypto/constants.hpp"

namespace ratchetlab::crypto {

class EntropySource;

/// X25519 scalar. Always stored clamped: low three bits clear, bit 255 clear, bit 254 set.
class PrivateKey {
public:
    PrivateKey() = default;
    explicit PrivateKey(const ByteArray<kKeySize>& raw);

    std::span<const std::uint8_t, kKeySize> view() const { return secret_.view(); }
    void wipe() noexcept { secret_.wipe(); }
    bool operator==(const PrivateKey&) const = default;

private:
    Secret<kKeySize> secret_;
};

class PublicKey {
public:
    PublicKey() { bytes_.fill(0); }
    explicit PublicKey(const ByteArray<kKeySize>& raw) : bytes_(raw) {}
    /// Throws Error(Errc::malformed) unless exactly 32 bytes.
    static PublicKey from_bytes(ByteView raw);

    const ByteArray<kKeySize>& bytes() const { return bytes_; }
    ByteView view() const { return bytes_; }
    auto operator<=>(const PublicKey&) const = default;

private:
    ByteArray<kKeySize> bytes_;
};

struct SharedSecret {
    Secret<kKeySize> bytes;
};

/// Ed25519 public key used only to check prekey signatures.
class SigningPublicKey {
public:
    SigningPublicKey() { bytes_.fill(0); }
    explicit SigningPublicKey(const ByteArray<kKeySize>& raw) : bytes_(raw) {}
    static SigningPublicKey from_bytes(ByteView raw);

    const ByteArray<kKeySize>& bytes() const { return bytes_; }
    ByteView view() const { return bytes_; }
    auto operator<=>(const SigningPublicKey&) const = default;

private:
    ByteArray<kKeySize> bytes_;
};

class Signature {
public:
    Signature() { bytes_.fill(0); }
    explicit Signature(const ByteArray<kSignatureSize>& raw) : bytes_(raw) {}
    static Signature from_bytes(ByteView raw);

    const ByteArray<kSignatureSize>& bytes() const { return bytes_; }
    ByteArray<kSignatureSize>& mutable_bytes() { return bytes_; }
    ByteView view() const { return bytes_; }
    bool operator==(const Signature&) const = default;

private:
    ByteArray<kSignatureSize> bytes_;
};

struct KeyPair {
    PrivateKey priv;
    PublicKey pub;
};

/// What a user publishes as their long-term identity: the DH key and the
/// signing key derived from the same identity secret.
struct IdentityPublic {
    PublicKey dh;
    SigningPublicKey signing;
    bool operator==(const IdentityPublic&) const = default;
};

/// Draws 32 bytes, clamps, and multiplies the base point.
KeyPair generate_keypair(EntropySource& rng);

/// Re-derives the public half from a private key.
KeyPair keypair_from_private(const PrivateKey& priv);

/// X25519. Throws Error(Errc::contributory) if the result is all zero
/// (peer sent a low-order point).
SharedSecret dh(const PrivateKey& own, const PublicKey& peer);

}  // namespace ratchetlab::crypto

template <>
struct std::hash<ratchetlab::crypto::PublicKey> {
    std::size_t operator()(const ratchetlab::crypto::PublicKey& k) const noexcept {
        std::size_t h = 0;
        for (std::size_t i = 0; i < sizeof(std::size_t); ++i) h = (h << 8) | k.bytes()[i];
        return h;
    }
};
