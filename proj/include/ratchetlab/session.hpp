#pragma once

#include <cstdint>
#include <string>

#include "ratchetlab/bytes.hpp"
#include "ratchetlab/crypto/entropy.hpp"
#include "ratchetlab/crypto/keys.hpp"
#include "ratchetlab/double_ratchet.hpp"
#include "ratchetlab/registry.hpp"
#include "ratchetlab/wire.hpp"
#include "ratchetlab/x3dh.hpp"

namespace ratchetlab::session {

using registry::Tick;
using registry::UserId;

/// A user's device: identity key plus the private halves of every prekey it
/// has published.
class Account {
public:
    Account(UserId user_id, crypto::EntropySource& rng);

    const UserId& user_id() const { return user_id_; }
    const crypto::KeyPair& identity() const { return keys_.identity; }
    const crypto::IdentityPublic& identity_public() const { return identity_public_; }
    x3dh::ResponderKeys& keys() { return keys_; }
    const x3dh::ResponderKeys& keys() const { return keys_; }

    void register_with(registry::Registry& server, std::size_t one_time_count, Tick now);
    /// Publishes a new signed prekey and forgets private keys the server no longer retains.
    void rotate_signed_prekey(registry::Registry& server, Tick now);
    /// Uploads `count` fresh one-time prekeys; returns the server's pool size.
    std::size_t replenish(registry::Registry& server, std::size_t count);

private:
    registry::SignedPrekeyUpload make_signed_prekey();
    std::vector<registry::OneTimePrekeyRecord> make_one_time_prekeys(std::size_t count);

    UserId user_id_;
    crypto::EntropySource* rng_;
    x3dh::ResponderKeys keys_;
    crypto::IdentityPublic identity_public_;
    std::uint32_t next_spk_id_ = 1;
    std::uint32_t next_opk_id_ = 1;
};

enum class Role { initiated, responded };

/// One end of a pairwise conversation.
class Session {
public:
    Session(UserId peer, ratchet::RatchetState ratchet, Role role, crypto::PublicKey ik_remote)
        : peer_(std::move(peer)), ratchet_(std::move(ratchet)), role_(role), ik_remote_(ik_remote) {}

    /// Returns a sealed normal envelope.
    Bytes encrypt(ByteView plaintext);
    /// Opens a sealed normal envelope. Errc::no_session for an initial envelope.
    Bytes decrypt(ByteView envelope, crypto::EntropySource& rng);

    const UserId& peer() const { return peer_; }
    Role established_via() const { return role_; }
    const crypto::PublicKey& ik_remote() const { return ik_remote_; }
    const ratchet::RatchetState& ratchet() const { return ratchet_; }
    ratchet::RatchetState& mutable_ratchet() { return ratchet_; }

private:
    UserId peer_;
    ratchet::RatchetState ratchet_;
    Role role_;
    crypto::PublicKey ik_remote_;
};

struct Outbound {
    Session session;
    Bytes envelope;
};

struct Inbound {
    Session session;
    Bytes plaintext;
};

/// X3DH against `bundle`, ratchet initialisation, and the first message. The
/// initial envelope's ciphertext wraps ratchet message #0 (a sealed normal
/// envelope), so the first payload also starts the ratchet.
Outbound establish_outbound_with_bundle(const Account& own, const registry::PrekeyBundle& bundle,
                                        const UserId& peer, ByteView first_plaintext, crypto::EntropySource& rng);

/// Fetches the peer's bundle from the server, then establish_outbound_with_bundle.
Outbound establish_outbound(const Account& own, registry::Registry& server, const UserId& peer,
                            ByteView first_plaintext, crypto::EntropySource& rng, Tick now = 0);

/// Responder side. Errc::no_session if the envelope is not an initial message.
/// Nothing is retained on failure.
Inbound establish_inbound(Account& own, const UserId& peer, ByteView envelope, crypto::EntropySource& rng);

/// Sixty decimal digits: two 30-digit halves, one per identity, in ascending order.
struct SafetyCode {
    std::string digits;
    /// Twelve space-separated groups of five.
    std::string grouped() const;
    bool operator==(const SafetyCode&) const = default;
};

inline constexpr int kSafetyCodeIterations = 5200;

/// 30-digit fingerprint of one identity.
std::string safety_code_half(const crypto::PublicKey& identity, const UserId& user_id);

SafetyCode safety_code(const crypto::PublicKey& own_identity, const UserId& own_id,
                       const crypto::PublicKey& peer_identity, const UserId& peer_id);

}  // namespace ratchetlab::session
