#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <utility>

#include "ratchetlab/bytes.hpp"
#include "ratchetlab/crypto/constants.hpp"
#include "ratchetlab/crypto/entropy.hpp"
#include "ratchetlab/crypto/keys.hpp"

namespace ratchetlab::ratchet {

/// Upper bound on stored skipped message keys, and on the gap a single
/// message may open in one chain.
inline constexpr std::size_t kMaxSkip = 1000;

struct RootKey {
    Secret<crypto::kKeySize> bytes;
};

struct ChainKey {
    Secret<crypto::kKeySize> bytes;
    std::uint32_t index = 0;
};

/// enc_key(32) || mac_key(32) || iv(16), consumed whole by the AEAD.
struct MessageKey {
    Secret<crypto::kMessageKeyMaterial> material;
};

struct RatchetHeader {
    crypto::PublicKey ratchet_pub;
    std::uint32_t prev_chain_len = 0;
    std::uint32_t msg_index = 0;

    /// encode_public(ratchet_pub) || be32(prev_chain_len) || be32(msg_index)
    Bytes encode() const;
    bool operator==(const RatchetHeader&) const = default;
};

struct SkippedKeyId {
    crypto::PublicKey ratchet_pub;
    std::uint32_t index = 0;
    auto operator<=>(const SkippedKeyId&) const = default;
};

/// Counts of ratchet movements, for transcript labelling.
struct StepCounters {
    std::uint64_t dh_steps = 0;
    std::uint64_t send_steps = 0;
    std::uint64_t recv_steps = 0;
    bool operator==(const StepCounters&) const = default;
};

struct RatchetState {
    RootKey root;
    std::optional<ChainKey> send_chain;
    std::optional<ChainKey> recv_chain;
    crypto::KeyPair own_ratchet;
    std::optional<crypto::PublicKey> remote_ratchet_pub;
    std::uint32_t prev_send_len = 0;
    std::map<SkippedKeyId, MessageKey> skipped;
    Bytes ad;
    StepCounters counters;
};

struct EncryptedMessage {
    RatchetHeader header;
    Bytes ciphertext;
};

/// The initiator performs the first DH step at once, against the responder's
/// signed prekey, so it can send before hearing back.
RatchetState init_initiator(const Secret<crypto::kKeySize>& sk, const crypto::PublicKey& remote_signed_prekey,
                            ByteView ad, crypto::EntropySource& rng);

/// The responder's first ratchet key is its signed prekey; no chain exists
/// until the initiator's first message arrives.
RatchetState init_responder(const Secret<crypto::kKeySize>& sk, const crypto::KeyPair& own_signed_prekey, ByteView ad);

/// (root, recv) <- KDF_root(root, DH(own, new_remote)); fresh own key;
/// (root, send) <- KDF_root(root, DH(own', new_remote)).
/// Returns false, leaving the state untouched, if new_remote is already the
/// stored remote key. On error the state is unchanged.
bool dh_ratchet_step(RatchetState& state, const crypto::PublicKey& new_remote, crypto::EntropySource& rng);

/// next = HMAC(ck, 0x02); mk = HKDF(HMAC(ck, 0x01), zero salt, "msg-key-v1", 80).
std::pair<ChainKey, MessageKey> symmetric_step(const ChainKey& chain);

/// Errc::state if there is no sending chain yet.
EncryptedMessage encrypt(RatchetState& state, ByteView plaintext);

/// Commits state changes only if the message authenticates.
/// Errc::authentication for a bad tag or a replayed message,
/// Errc::flood if accepting it would exceed kMaxSkip stored keys.
Bytes decrypt(RatchetState& state, const RatchetHeader& header, ByteView ciphertext, crypto::EntropySource& rng);

/// Debug-only snapshot of the whole state, private keys included. Never sent on the wire.
Bytes serialize_state(const RatchetState& state);
RatchetState deserialize_state(ByteView data);

}  // namespace ratchetlab::ratchet
