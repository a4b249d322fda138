#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

#include "ratchetlab/bytes.hpp"

namespace ratchetlab::crypto {

inline constexpr std::size_t kKeySize = 32;
inline constexpr std::size_t kSignatureSize = 64;
inline constexpr std::size_t kMacSize = 32;
inline constexpr std::size_t kAesBlock = 16;

// 32-byte encryption key || 32-byte MAC key || 16-byte IV
inline constexpr std::size_t kMessageKeyMaterial = 80;

// Maximum HKDF-SHA256 output (255 * 32).
inline constexpr std::size_t kKdfMaxOutput = 8160;

// Domain-separation strings. These are part of the interoperability contract.
inline constexpr std::string_view kInfoX3dh = "x3dh-sk-v1";
inline constexpr std::string_view kInfoRootStep = "root-step-v1";
inline constexpr std::string_view kInfoChainStep = "chain-step-v1";  // reserved; chain steps use raw HMAC
inline constexpr std::string_view kInfoMessageKey = "msg-key-v1";
inline constexpr std::string_view kInfoSigningKey = "sig-key-v1";

inline constexpr std::uint8_t kX3dhPrefixByte = 0xFF;
inline constexpr ByteArray<kKeySize> kZeroSalt{};

}  // namespace ratchetlab::crypto
