#include "ratchetlab/x3dh.hpp"

#include <algorithm>

#include "ratchetlab/crypto/aead.hpp"
#include "ratchetlab/crypto/constants.hpp"
#include "ratchetlab/crypto/primitives.hpp"
#include "ratchetlab/crypto/signature.hpp"
#include "ratchetlab/encoding.hpp"
#include "ratchetlab/error.hpp"

namespace ratchetlab::x3dh {

using crypto::KeyPair;
using crypto::PublicKey;

void ErasureProbe::observe(std::string_view label, ByteView wiped) {
    bool zero = std::all_of(wiped.begin(), wiped.end(), [](std::uint8_t b) { return b == 0; });
    observations_.push_back({std::string(label), zero, wiped.size()});
}

bool ErasureProbe::saw(std::string_view label) const {
    return std::any_of(observations_.begin(), observations_.end(), [&](const auto& o) { return o.label == label; });
}

bool ErasureProbe::all_zeroed() const {
    return std::all_of(observations_.begin(), observations_.end(), [](const auto& o) { return o.zeroed; });
}

namespace {

void wipe_and_report(std::span<std::uint8_t> buf, std::string_view label, ErasureProbe* probe) {
    secure_wipe(buf);
    if (probe) probe->observe(label, buf);
}

// prefix(32 x 0xFF) || DH_1 || DH_2 || DH_3 [|| DH_4]
class DhTranscript {
public:
    DhTranscript() : buf_(Bytes(crypto::kKeySize, crypto::kX3dhPrefixByte)) {}
    void add(const crypto::SharedSecret& s) { buf_.append(s.bytes.view()); }
    MasterSecret derive() const {
        SecretBytes out = crypto::kdf32(buf_.view());
        ByteArray<crypto::kKeySize> raw;
        std::copy(out.view().begin(), out.view().end(), raw.begin());
        MasterSecret sk(raw);
        secure_wipe(raw);
        return sk;
    }
    void erase(ErasureProbe* probe) { wipe_and_report(buf_.mutable_view(), "dh_outputs", probe); }

private:
    SecretBytes buf_;
};

}  // namespace

Bytes build_associated_data(const PublicKey& initiator_identity, const PublicKey& responder_identity) {
    return concat({encode_public(initiator_identity), encode_public(responder_identity)});
}

SecretBytes first_message_key(const MasterSecret& sk) {
    Bytes info = to_bytes(crypto::kInfoX3dh);
    info.push_back(0x01);
    return crypto::kdf(sk.view(), crypto::kZeroSalt, info, crypto::kMessageKeyMaterial);
}

Agreement agree(const KeyPair& own_identity, const registry::PrekeyBundle& bundle, crypto::EntropySource& rng,
                ErasureProbe* probe) {
    if (!crypto::verify_prekey(bundle.identity.signing, encode_public(bundle.spk_pub), bundle.spk_signature.view()))
        throw Error(Errc::signature, "prekey bundle signature does not verify; aborting");

    KeyPair ephemeral = crypto::generate_keypair(rng);
    DhTranscript transcript;
    try {
        transcript.add(crypto::dh(own_identity.priv, bundle.spk_pub));
        transcript.add(crypto::dh(ephemeral.priv, bundle.identity.dh));
        transcript.add(crypto::dh(ephemeral.priv, bundle.spk_pub));
        if (bundle.opk) transcript.add(crypto::dh(ephemeral.priv, bundle.opk->pub));
    } catch (...) {
        transcript.erase(probe);
        ephemeral.priv.wipe();
        throw;
    }

    Agreement out{transcript.derive(),
                  build_associated_data(own_identity.pub, bundle.identity.dh),
                  own_identity.pub,
                  ephemeral.pub,
                  bundle.spk_id,
                  bundle.opk ? std::optional(bundle.opk->opk_id) : std::nullopt};

    transcript.erase(probe);
    ephemeral.priv.wipe();
    if (probe) probe->observe("ephemeral_private", ephemeral.priv.view());
    return out;
}

InitialMessage seal_first(const Agreement& agreement, ByteView first_plaintext) {
    SecretBytes key = first_message_key(agreement.sk);
    return InitialMessage{agreement.sender_identity, agreement.ephemeral_pub, agreement.spk_id, agreement.opk_id,
                          crypto::aead_encrypt(key.view(), first_plaintext, agreement.ad)};
}

std::pair<InitiatorOutput, InitialMessage> initiate(const KeyPair& own_identity, const registry::PrekeyBundle& bundle,
                                                    ByteView first_plaintext, crypto::EntropySource& rng,
                                                    ErasureProbe* probe) {
    Agreement a = agree(own_identity, bundle, rng, probe);
    InitialMessage msg = seal_first(a, first_plaintext);
    InitiatorOutput out{a.sk, a.ad, a.ephemeral_pub, a.spk_id, a.opk_id, msg.ciphertext};
    return {std::move(out), std::move(msg)};
}

ResponderOutput respond(ResponderKeys& keys, const InitialMessage& msg, ErasureProbe* probe) {
    auto spk = keys.signed_prekeys.find(msg.spk_id);
    if (spk == keys.signed_prekeys.end())
        throw Error(Errc::missing_key, "no signed prekey with id " + std::to_string(msg.spk_id));
    auto opk = keys.one_time_prekeys.end();
    if (msg.opk_id) {
        opk = keys.one_time_prekeys.find(*msg.opk_id);
        if (opk == keys.one_time_prekeys.end())
            throw Error(Errc::missing_key, "no one-time prekey with id " + std::to_string(*msg.opk_id));
    }

    DhTranscript transcript;
    try {
        transcript.add(crypto::dh(spk->second.priv, msg.sender_identity));
        transcript.add(crypto::dh(keys.identity.priv, msg.ephemeral));
        transcript.add(crypto::dh(spk->second.priv, msg.ephemeral));
        if (msg.opk_id) transcript.add(crypto::dh(opk->second.priv, msg.ephemeral));
    } catch (...) {
        transcript.erase(probe);
        throw;
    }
    MasterSecret sk = transcript.derive();
    transcript.erase(probe);

    Bytes ad = build_associated_data(msg.sender_identity, keys.identity.pub);
    Bytes plaintext;
    try {
        SecretBytes key = first_message_key(sk);
        plaintext = crypto::aead_decrypt(key.view(), msg.ciphertext, ad);
    } catch (const Error& e) {
        sk.wipe();
        if (probe) probe->observe("sk", sk.view());
        throw Error(Errc::terminated, std::string("initial ciphertext rejected: ") + e.what());
    }

    if (opk != keys.one_time_prekeys.end()) {
        opk->second.priv.wipe();
        if (probe) probe->observe("one_time_private", opk->second.priv.view());
        keys.one_time_prekeys.erase(opk);
    }
    return ResponderOutput{std::move(sk), std::move(ad), std::move(plaintext)};
}

}  // namespace ratchetlab::x3dh
