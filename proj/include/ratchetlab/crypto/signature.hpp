#pragma once

#include "ratchetlab/bytes.hpp"
#include "ratchetlab/crypto/keys.hpp"

namespace ratchetlab::crypto {

// Prekey signatures use Ed25519 under a signing key derived from the
// identity private key: seed = kdf(identity_priv, zero_salt, "sig-key-v1", 32).

SigningPublicKey signing_public_key(const KeyPair& identity);

IdentityPublic identity_public(const KeyPair& identity);

Signature sign_prekey(const KeyPair& identity, ByteView encoded_spk);

/// Returns false for any malformed input, never throws.
bool verify_prekey(const SigningPublicKey& identity_signing, ByteView encoded_spk, ByteView signature);

}  // namespace ratchetlab::crypto
