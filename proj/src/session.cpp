#include "ratchetlab/session.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "ratchetlab/crypto/primitives.hpp"
#include "ratchetlab/crypto/signature.hpp"
#include "ratchetlab/encoding.hpp"
#include "ratchetlab/error.hpp"

namespace ratchetlab::session {

Account::Account(UserId user_id, crypto::EntropySource& rng) : user_id_(std::move(user_id)), rng_(&rng) {
    keys_.identity = crypto::generate_keypair(rng);
    identity_public_ = crypto::identity_public(keys_.identity);
}

registry::SignedPrekeyUpload Account::make_signed_prekey() {
    auto pair = crypto::generate_keypair(*rng_);
    registry::SignedPrekeyUpload up{next_spk_id_++, pair.pub,
                                    crypto::sign_prekey(keys_.identity, encode_public(pair.pub))};
    keys_.signed_prekeys.emplace(up.spk_id, std::move(pair));
    return up;
}

std::vector<registry::OneTimePrekeyRecord> Account::make_one_time_prekeys(std::size_t count) {
    std::vector<registry::OneTimePrekeyRecord> out;
    for (std::size_t i = 0; i < count; ++i) {
        auto pair = crypto::generate_keypair(*rng_);
        out.push_back({next_opk_id_, pair.pub});
        keys_.one_time_prekeys.emplace(next_opk_id_++, std::move(pair));
    }
    return out;
}

void Account::register_with(registry::Registry& server, std::size_t one_time_count, Tick now) {
    auto spk = make_signed_prekey();
    auto opks = make_one_time_prekeys(one_time_count);
    server.register_user(user_id_, identity_public_, spk, opks, now);
}

void Account::rotate_signed_prekey(registry::Registry& server, Tick now) {
    auto spk = make_signed_prekey();
    server.rotate_signed_prekey(user_id_, spk, now);
    std::set<std::uint32_t> retained;
    for (const auto& r : server.record(user_id_).signed_prekeys) retained.insert(r.spk_id);
    std::erase_if(keys_.signed_prekeys, [&](const auto& kv) { return !retained.contains(kv.first); });
}

std::size_t Account::replenish(registry::Registry& server, std::size_t count) {
    return server.replenish_opks(user_id_, make_one_time_prekeys(count));
}

Bytes Session::encrypt(ByteView plaintext) {
    auto msg = ratchet::encrypt(ratchet_, plaintext);
    return wire::seal_normal({msg.header, std::move(msg.ciphertext)});
}

Bytes Session::decrypt(ByteView envelope, crypto::EntropySource& rng) {
    if (wire::peek_kind(envelope) != wire::Kind::normal)
        throw Error(Errc::no_session, "initial envelope received on an established session");
    auto msg = wire::open_normal(envelope);
    return ratchet::decrypt(ratchet_, msg.header, msg.ciphertext, rng);
}

Outbound establish_outbound_with_bundle(const Account& own, const registry::PrekeyBundle& bundle, const UserId& peer,
                                        ByteView first_plaintext, crypto::EntropySource& rng) {
    auto agreement = x3dh::agree(own.identity(), bundle, rng);
    auto state = ratchet::init_initiator(agreement.sk, bundle.spk_pub, agreement.ad, rng);
    auto first = ratchet::encrypt(state, first_plaintext);
    Bytes inner = wire::seal_normal({first.header, std::move(first.ciphertext)});
    auto initial = x3dh::seal_first(agreement, inner);
    return Outbound{Session(peer, std::move(state), Role::initiated, bundle.identity.dh), wire::seal_initial(initial)};
}

Outbound establish_outbound(const Account& own, registry::Registry& server, const UserId& peer,
                            ByteView first_plaintext, crypto::EntropySource& rng, Tick now) {
    auto bundle = server.fetch_bundle(own.user_id(), peer, now);
    return establish_outbound_with_bundle(own, bundle, peer, first_plaintext, rng);
}

Inbound establish_inbound(Account& own, const UserId& peer, ByteView envelope, crypto::EntropySource& rng) {
    if (wire::peek_kind(envelope) != wire::Kind::initial)
        throw Error(Errc::no_session, "normal message from " + peer + " but no session exists");
    auto initial = wire::open_initial(envelope);
    auto spk = own.keys().signed_prekeys.find(initial.spk_id);
    if (spk == own.keys().signed_prekeys.end())
        throw Error(Errc::missing_key, "no signed prekey with id " + std::to_string(initial.spk_id));
    crypto::KeyPair spk_pair = spk->second;

    auto agreed = x3dh::respond(own.keys(), initial);
    auto state = ratchet::init_responder(agreed.sk, spk_pair, agreed.ad);
    auto inner = wire::open_normal(agreed.first_plaintext);
    Bytes plaintext = ratchet::decrypt(state, inner.header, inner.ciphertext, rng);
    return Inbound{Session(peer, std::move(state), Role::responded, initial.sender_identity), std::move(plaintext)};
}

std::string SafetyCode::grouped() const {
    std::string out;
    for (std::size_t i = 0; i < digits.size(); i += 5) {
        if (i) out.push_back(' ');
        out += digits.substr(i, 5);
    }
    return out;
}

std::string safety_code_half(const crypto::PublicKey& identity, const UserId& user_id) {
    Bytes encoded = encode_public(identity);
    Bytes seed{0x00};
    append(seed, encoded);
    append(seed, to_bytes(user_id));
    auto h = crypto::sha256(seed);
    for (int i = 1; i < kSafetyCodeIterations; ++i) h = crypto::sha256(concat({h, encoded}));

    std::string out;
    for (std::size_t chunk = 0; chunk < 6; ++chunk) {
        std::uint64_t v = 0;
        for (std::size_t j = 0; j < 5; ++j) v = (v << 8) | h[chunk * 5 + j];
        char buf[8];
        std::snprintf(buf, sizeof(buf), "%05llu", static_cast<unsigned long long>(v % 100000));
        out += buf;
    }
    return out;
}

SafetyCode safety_code(const crypto::PublicKey& own_identity, const UserId& own_id,
                       const crypto::PublicKey& peer_identity, const UserId& peer_id) {
    auto a = safety_code_half(own_identity, own_id);
    auto b = safety_code_half(peer_identity, peer_id);
    if (b < a) std::swap(a, b);
    return SafetyCode{a + b};
}

}  // namespace ratchetlab::session
