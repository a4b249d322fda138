#pragma once

#include "ratchetlab/bytes.hpp"

namespace ratchetlab::crypto {

// Encrypt-then-MAC: AES-256-CBC with PKCS#7 padding, then HMAC-SHA256 over
// associated_data || iv || cbc_output. The 80-byte key material is split
// enc_key(32) || mac_key(32) || iv(16).
//
// Output layout: iv(16) || cbc_output(16k) || tag(32).

inline constexpr std::size_t kAeadMinCiphertext = 16 + 16 + 32;

Bytes aead_encrypt(ByteView message_key_material, ByteView plaintext, ByteView associated_data);

/// Verifies the tag in constant time before decrypting.
/// Errc::malformed for bad lengths, Errc::authentication for a bad tag,
/// Errc::internal if padding is invalid under a valid tag.
Bytes aead_decrypt(ByteView message_key_material, ByteView ciphertext, ByteView associated_data);

}  // namespace ratchetlab::crypto
