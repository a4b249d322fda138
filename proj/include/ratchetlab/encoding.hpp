#pragma once

#include "ratchetlab/bytes.hpp"
#include "ratchetlab/crypto/keys.hpp"

namespace ratchetlab {

// Canonical public-key encoding: type byte 0x05 followed by the 32 key bytes.
inline constexpr std::uint8_t kKeyTypeByte = 0x05;
inline constexpr std::size_t kEncodedKeySize = 33;

Bytes encode_public(const crypto::PublicKey& key);

/// Throws Error(Errc::parse) unless the input is exactly 33 bytes starting with 0x05.
crypto::PublicKey decode_public(ByteView encoded);

}  // namespace ratchetlab
