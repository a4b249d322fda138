#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ratchetlab/bytes.hpp"
#include "ratchetlab/crypto/entropy.hpp"
#include "ratchetlab/crypto/keys.hpp"
#include "ratchetlab/registry.hpp"

namespace ratchetlab::x3dh {

using MasterSecret = Secret<crypto::kKeySize>;

/// Records every scratch buffer at the moment it is wiped, so tests can check
/// that ephemeral keys, DH outputs and abandoned secrets really were zeroed.
class ErasureProbe {
public:
    struct Observation {
        std::string label;
        bool zeroed = false;
        std::size_t size = 0;
    };

    void observe(std::string_view label, ByteView wiped);
    const std::vector<Observation>& observations() const { return observations_; }
    bool saw(std::string_view label) const;
    bool all_zeroed() const;

private:
    std::vector<Observation> observations_;
};

/// The initiator's first message: exactly the sender identity, the ephemeral
/// key, the prekey ids used, and the initial ciphertext.
struct InitialMessage {
    crypto::PublicKey sender_identity;
    crypto::PublicKey ephemeral;
    std::uint32_t spk_id = 0;
    std::optional<std::uint32_t> opk_id;
    Bytes ciphertext;
    bool operator==(const InitialMessage&) const = default;
};

/// Key-agreement result before anything is encrypted.
struct Agreement {
    MasterSecret sk;
    Bytes ad;
    crypto::PublicKey sender_identity;
    crypto::PublicKey ephemeral_pub;
    std::uint32_t spk_id = 0;
    std::optional<std::uint32_t> opk_id;
};

struct InitiatorOutput {
    MasterSecret sk;
    Bytes ad;
    crypto::PublicKey ephemeral_pub;
    std::uint32_t used_spk_id = 0;
    std::optional<std::uint32_t> used_opk_id;
    Bytes initial_ciphertext;
};

/// Private counterparts of everything a user has published.
struct ResponderKeys {
    crypto::KeyPair identity;
    std::map<std::uint32_t, crypto::KeyPair> signed_prekeys;
    std::map<std::uint32_t, crypto::KeyPair> one_time_prekeys;
};

struct ResponderOutput {
    MasterSecret sk;
    Bytes ad;
    Bytes first_plaintext;
};

/// Encode(IK_a) || Encode(IK_b), initiator first.
Bytes build_associated_data(const crypto::PublicKey& initiator_identity, const crypto::PublicKey& responder_identity);

/// 80 bytes of AEAD key material for the initial ciphertext, derived from sk
/// (sk itself is never used as a cipher key).
SecretBytes first_message_key(const MasterSecret& sk);

/// Verifies the bundle signature (Errc::signature on failure), draws an
/// ephemeral key and derives SK from three DH outputs, or four if the bundle
/// carries a one-time prekey. The DH outputs and ephemeral private key are
/// wiped before returning.
Agreement agree(const crypto::KeyPair& own_identity, const registry::PrekeyBundle& bundle, crypto::EntropySource& rng,
                ErasureProbe* probe = nullptr);

/// Encrypts the first payload under the agreement and assembles the message.
InitialMessage seal_first(const Agreement& agreement, ByteView first_plaintext);

/// agree() followed by seal_first().
std::pair<InitiatorOutput, InitialMessage> initiate(const crypto::KeyPair& own_identity,
                                                    const registry::PrekeyBundle& bundle, ByteView first_plaintext,
                                                    crypto::EntropySource& rng, ErasureProbe* probe = nullptr);

/// Recomputes SK on the responder side and opens the initial ciphertext.
/// Errc::missing_key for an unknown prekey id; Errc::terminated if the
/// ciphertext does not open, in which case SK is wiped. On success the
/// one-time prekey private key is erased from `keys`.
ResponderOutput respond(ResponderKeys& keys, const InitialMessage& msg, ErasureProbe* probe = nullptr);

}  // namespace ratchetlab::x3dh
