#pragma once

#include <cstdint>
#include <variant>

#include "ratchetlab/bytes.hpp"
#include "ratchetlab/double_ratchet.hpp"
#include "ratchetlab/x3dh.hpp"

namespace ratchetlab::wire {

// Initial = 0x01 0x01 || enc(IK_a) || enc(EK_a) || spk_id(4) || opk_flag(1) || [opk_id(4)] || clen(4) || ciphertext
// Normal  = 0x01 0x02 || enc(ratchet_pub) || prev_len(4) || index(4) || clen(4) || ciphertext
// Integers are big-endian; enc() is the 33-byte public-key encoding.

inline constexpr std::uint8_t kVersion = 0x01;

enum class Kind : std::uint8_t { initial = 0x01, normal = 0x02 };

struct NormalMessage {
    ratchet::RatchetHeader header;
    Bytes ciphertext;
    bool operator==(const NormalMessage&) const = default;
};

using Envelope = std::variant<x3dh::InitialMessage, NormalMessage>;

Bytes seal_initial(const x3dh::InitialMessage& msg);
Bytes seal_normal(const NormalMessage& msg);
Bytes seal(const Envelope& env);

/// Checks version and kind only. Throws Error(Errc::parse).
Kind peek_kind(ByteView data);

/// Total over arbitrary input: either a value or Error(Errc::parse).
x3dh::InitialMessage open_initial(ByteView data);
NormalMessage open_normal(ByteView data);
Envelope open(ByteView data);

}  // namespace ratchetlab::wire
