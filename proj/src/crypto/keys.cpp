#include "ratchetlab/crypto/keys.hpp"

#include <algorithm>

#include "openssl_util.hpp"
#include "ratchetlab/crypto/entropy.hpp"
#include "ratchetlab/error.hpp"

namespace ratchetlab::crypto {

using detail::PkeyCtxPtr;
using detail::PkeyPtr;

PrivateKey::PrivateKey(const ByteArray<kKeySize>& raw) : secret_(raw) {
    auto b = secret_.mutable_view();
    b[0] &= 248;
    b[31] &= 127;
    b[31] |= 64;
}

PublicKey PublicKey::from_bytes(ByteView raw) {
    if (raw.size() != kKeySize) throw Error(Errc::malformed, "public key must be 32 bytes");
    ByteArray<kKeySize> a;
    std::copy(raw.begin(), raw.end(), a.begin());
    return PublicKey(a);
}

SigningPublicKey SigningPublicKey::from_bytes(ByteView raw) {
    if (raw.size() != kKeySize) throw Error(Errc::malformed, "signing key must be 32 bytes");
    ByteArray<kKeySize> a;
    std::copy(raw.begin(), raw.end(), a.begin());
    return SigningPublicKey(a);
}

Signature Signature::from_bytes(ByteView raw) {
    if (raw.size() != kSignatureSize) throw Error(Errc::malformed, "signature must be 64 bytes");
    ByteArray<kSignatureSize> a;
    std::copy(raw.begin(), raw.end(), a.begin());
    return Signature(a);
}

KeyPair keypair_from_private(const PrivateKey& priv) {
    PkeyPtr pkey(EVP_PKEY_new_raw_private_key(EVP_PKEY_X25519, nullptr, priv.view().data(), kKeySize));
    if (!pkey) throw Error(Errc::internal, "X25519 key import failed");
    ByteArray<kKeySize> pub;
    std::size_t len = pub.size();
    if (EVP_PKEY_get_raw_public_key(pkey.get(), pub.data(), &len) != 1 || len != kKeySize)
        throw Error(Errc::internal, "X25519 public key export failed");
    return KeyPair{priv, PublicKey(pub)};
}

KeyPair generate_keypair(EntropySource& rng) {
    Secret<kKeySize> seed;
    rng.fill(seed.mutable_view());
    ByteArray<kKeySize> raw;
    std::copy(seed.view().begin(), seed.view().end(), raw.begin());
    PrivateKey priv(raw);
    secure_wipe(raw);
    return keypair_from_private(priv);
}

SharedSecret dh(const PrivateKey& own, const PublicKey& peer) {
    PkeyPtr mine(EVP_PKEY_new_raw_private_key(EVP_PKEY_X25519, nullptr, own.view().data(), kKeySize));
    PkeyPtr theirs(EVP_PKEY_new_raw_public_key(EVP_PKEY_X25519, nullptr, peer.bytes().data(), kKeySize));
    if (!mine || !theirs) throw Error(Errc::internal, "X25519 key import failed");
    PkeyCtxPtr ctx(EVP_PKEY_CTX_new(mine.get(), nullptr));
    if (!ctx || EVP_PKEY_derive_init(ctx.get()) != 1 || EVP_PKEY_derive_set_peer(ctx.get(), theirs.get()) != 1)
        throw Error(Errc::internal, "X25519 derive setup failed");

    SharedSecret out;
    std::size_t len = kKeySize;
    // OpenSSL refuses to return an all-zero X25519 output; treat that the same as our own check.
    if (EVP_PKEY_derive(ctx.get(), out.bytes.mutable_view().data(), &len) != 1 || len != kKeySize)
        throw Error(Errc::contributory, "DH output rejected (low-order peer point)");
    std::uint8_t acc = 0;
    for (auto b : out.bytes.view()) acc |= b;
    if (acc == 0) throw Error(Errc::contributory, "DH output is all zero (low-order peer point)");
    return out;
}

}  // namespace ratchetlab::crypto
