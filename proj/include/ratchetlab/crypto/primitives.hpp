#pragma once

#include <cstddef>

#include "ratchetlab/bytes.hpp"

namespace ratchetlab::crypto {

ByteArray<32> sha256(ByteView data);

ByteArray<32> hmac_sha256(ByteView key, ByteView data);

/// HKDF-SHA256 extract-and-expand. Throws Error(Errc::parameter) if out_len > 8160.
SecretBytes kdf(ByteView input_key_material, ByteView salt, ByteView info, std::size_t out_len);

/// The single-argument KDF(x) used by key agreement: 32 bytes, zero salt, X3DH info.
SecretBytes kdf32(ByteView input_key_material);

}  // namespace ratchetlab::crypto
