#include "ratchetlab/double_ratchet.hpp"

#include <algorithm>
#include <limits>

#include "ratchetlab/crypto/aead.hpp"
#include "ratchetlab/crypto/primitives.hpp"
#include "ratchetlab/encoding.hpp"
#include "ratchetlab/error.hpp"

namespace ratchetlab::ratchet {

using crypto::kKeySize;

namespace {

constexpr std::uint8_t kMessageKeyConstant = 0x01;
constexpr std::uint8_t kChainKeyConstant = 0x02;

template <std::size_t N>
Secret<N> take(ByteView src) {
    ByteArray<N> raw;
    std::copy_n(src.begin(), N, raw.begin());
    Secret<N> out(raw);
    secure_wipe(raw);
    return out;
}

// (root', chain) = split(HKDF(dh_out, salt = root, "root-step-v1", 64))
std::pair<RootKey, ChainKey> root_step(const RootKey& root, const crypto::SharedSecret& dh_out) {
    SecretBytes okm = crypto::kdf(dh_out.bytes.view(), root.bytes.view(), to_bytes(crypto::kInfoRootStep), 64);
    return {RootKey{take<kKeySize>(okm.view().first(32))}, ChainKey{take<kKeySize>(okm.view().subspan(32)), 0}};
}

Bytes message_ad(const RatchetState& state, const RatchetHeader& header) { return concat({state.ad, header.encode()}); }

// Derives and stores keys for recv indices [recv.index, until).
void skip_message_keys(RatchetState& state, std::uint32_t until) {
    if (!state.recv_chain || until <= state.recv_chain->index) return;
    if (until - state.recv_chain->index > kMaxSkip) throw Error(Errc::flood, "message gap exceeds MAX_SKIP");
    if (state.skipped.size() + (until - state.recv_chain->index) > kMaxSkip)
        throw Error(Errc::flood, "skipped-key store would exceed MAX_SKIP");
    while (state.recv_chain->index < until) {
        auto [next, mk] = symmetric_step(*state.recv_chain);
        state.skipped.insert_or_assign(SkippedKeyId{*state.remote_ratchet_pub, state.recv_chain->index}, std::move(mk));
        state.recv_chain = std::move(next);
        ++state.counters.recv_steps;
    }
}

}  // namespace

Bytes RatchetHeader::encode() const {
    Bytes out = encode_public(ratchet_pub);
    put_u32_be(out, prev_chain_len);
    put_u32_be(out, msg_index);
    return out;
}

RatchetState init_initiator(const Secret<kKeySize>& sk, const crypto::PublicKey& remote_signed_prekey, ByteView ad,
                            crypto::EntropySource& rng) {
    RatchetState s;
    s.own_ratchet = crypto::generate_keypair(rng);
    s.remote_ratchet_pub = remote_signed_prekey;
    auto [root, send] = root_step(RootKey{sk}, crypto::dh(s.own_ratchet.priv, remote_signed_prekey));
    s.root = std::move(root);
    s.send_chain = std::move(send);
    s.ad.assign(ad.begin(), ad.end());
    s.counters.dh_steps = 1;
    return s;
}

RatchetState init_responder(const Secret<kKeySize>& sk, const crypto::KeyPair& own_signed_prekey, ByteView ad) {
    RatchetState s;
    s.root = RootKey{sk};
    s.own_ratchet = own_signed_prekey;
    s.ad.assign(ad.begin(), ad.end());
    return s;
}

bool dh_ratchet_step(RatchetState& state, const crypto::PublicKey& new_remote, crypto::EntropySource& rng) {
    if (state.remote_ratchet_pub && *state.remote_ratchet_pub == new_remote) return false;

    auto [root1, recv] = root_step(state.root, crypto::dh(state.own_ratchet.priv, new_remote));
    crypto::KeyPair fresh = crypto::generate_keypair(rng);
    auto [root2, send] = root_step(root1, crypto::dh(fresh.priv, new_remote));

    state.prev_send_len = state.send_chain ? state.send_chain->index : 0;
    state.remote_ratchet_pub = new_remote;
    state.recv_chain = std::move(recv);
    state.own_ratchet = std::move(fresh);
    state.root = std::move(root2);
    state.send_chain = std::move(send);
    ++state.counters.dh_steps;
    return true;
}

std::pair<ChainKey, MessageKey> symmetric_step(const ChainKey& chain) {
    auto next = crypto::hmac_sha256(chain.bytes.view(), ByteView(&kChainKeyConstant, 1));
    auto seed = crypto::hmac_sha256(chain.bytes.view(), ByteView(&kMessageKeyConstant, 1));
    SecretBytes material =
        crypto::kdf(seed, crypto::kZeroSalt, to_bytes(crypto::kInfoMessageKey), crypto::kMessageKeyMaterial);
    secure_wipe(seed);
    ChainKey out{Secret<kKeySize>(next), chain.index + 1};
    secure_wipe(next);
    return {std::move(out), MessageKey{take<crypto::kMessageKeyMaterial>(material.view())}};
}

EncryptedMessage encrypt(RatchetState& state, ByteView plaintext) {
    if (!state.send_chain) throw Error(Errc::state, "no sending chain: wait for the peer's first message");
    if (state.send_chain->index == std::numeric_limits<std::uint32_t>::max())
        throw Error(Errc::state, "sending chain exhausted");

    RatchetHeader header{state.own_ratchet.pub, state.prev_send_len, state.send_chain->index};
    auto [next, mk] = symmetric_step(*state.send_chain);
    Bytes ct = crypto::aead_encrypt(mk.material.view(), plaintext, message_ad(state, header));
    state.send_chain = std::move(next);
    ++state.counters.send_steps;
    return {header, std::move(ct)};
}

Bytes decrypt(RatchetState& state, const RatchetHeader& header, ByteView ciphertext, crypto::EntropySource& rng) {
    RatchetState work = state;

    if (auto it = work.skipped.find(SkippedKeyId{header.ratchet_pub, header.msg_index}); it != work.skipped.end()) {
        Bytes pt = crypto::aead_decrypt(it->second.material.view(), ciphertext, message_ad(work, header));
        work.skipped.erase(it);
        state = std::move(work);
        return pt;
    }

    if (!work.remote_ratchet_pub || *work.remote_ratchet_pub != header.ratchet_pub) {
        skip_message_keys(work, header.prev_chain_len);
        dh_ratchet_step(work, header.ratchet_pub, rng);
    } else if (!work.recv_chain) {
        // Only the initiator has a remote key without a receiving chain: the
        // responder's signed prekey, which never appears in a header.
        throw Error(Errc::authentication, "header reuses the peer's signed prekey");
    }
    if (header.msg_index < work.recv_chain->index)
        throw Error(Errc::authentication, "message key already used or expired (duplicate delivery?)");
    skip_message_keys(work, header.msg_index);

    auto [next, mk] = symmetric_step(*work.recv_chain);
    work.recv_chain = std::move(next);
    ++work.counters.recv_steps;
    Bytes pt = crypto::aead_decrypt(mk.material.view(), ciphertext, message_ad(work, header));
    state = std::move(work);
    return pt;
}

namespace {

constexpr std::uint8_t kStateMagic[4] = {'R', 'L', 'S', 'T'};
constexpr std::uint8_t kStateVersion = 1;

void put_u64_be(Bytes& out, std::uint64_t v) {
    for (int i = 7; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
public:
    explicit Reader(ByteView data) : data_(data) {}
    ByteView take(std::size_t n) {
        if (data_.size() - pos_ < n) throw Error(Errc::parse, "truncated ratchet state");
        auto out = data_.subspan(pos_, n);
        pos_ += n;
        return out;
    }
    std::uint8_t u8() { return take(1)[0]; }
    std::uint32_t u32() { return get_u32_be(take(4)); }
    std::uint64_t u64() {
        std::uint64_t v = 0;
        for (auto b : take(8)) v = (v << 8) | b;
        return v;
    }
    bool done() const { return pos_ == data_.size(); }

private:
    ByteView data_;
    std::size_t pos_ = 0;
};

void put_chain(Bytes& out, const std::optional<ChainKey>& c) {
    out.push_back(c ? 1 : 0);
    if (!c) return;
    append(out, c->bytes.view());
    put_u32_be(out, c->index);
}

std::optional<ChainKey> get_chain(Reader& r) {
    auto flag = r.u8();
    if (flag > 1) throw Error(Errc::parse, "bad chain presence flag");
    if (flag == 0) return std::nullopt;
    ChainKey c{take<kKeySize>(r.take(kKeySize)), 0};
    c.index = r.u32();
    return c;
}

}  // namespace

Bytes serialize_state(const RatchetState& s) {
    Bytes out(std::begin(kStateMagic), std::end(kStateMagic));
    out.push_back(kStateVersion);
    append(out, s.root.bytes.view());
    put_chain(out, s.send_chain);
    put_chain(out, s.recv_chain);
    append(out, s.own_ratchet.priv.view());
    append(out, s.own_ratchet.pub.view());
    out.push_back(s.remote_ratchet_pub ? 1 : 0);
    if (s.remote_ratchet_pub) append(out, s.remote_ratchet_pub->view());
    put_u32_be(out, s.prev_send_len);
    put_u32_be(out, static_cast<std::uint32_t>(s.skipped.size()));
    for (const auto& [id, mk] : s.skipped) {
        append(out, id.ratchet_pub.view());
        put_u32_be(out, id.index);
        append(out, mk.material.view());
    }
    put_u32_be(out, static_cast<std::uint32_t>(s.ad.size()));
    append(out, s.ad);
    put_u64_be(out, s.counters.dh_steps);
    put_u64_be(out, s.counters.send_steps);
    put_u64_be(out, s.counters.recv_steps);
    return out;
}

RatchetState deserialize_state(ByteView data) {
    Reader r(data);
    auto magic = r.take(4);
    if (!std::equal(magic.begin(), magic.end(), std::begin(kStateMagic))) throw Error(Errc::parse, "not a ratchet state");
    if (r.u8() != kStateVersion) throw Error(Errc::parse, "unsupported ratchet state version");

    RatchetState s;
    s.root = RootKey{take<kKeySize>(r.take(kKeySize))};
    s.send_chain = get_chain(r);
    s.recv_chain = get_chain(r);
    ByteArray<kKeySize> priv;
    auto pv = r.take(kKeySize);
    std::copy(pv.begin(), pv.end(), priv.begin());
    s.own_ratchet.priv = crypto::PrivateKey(priv);
    secure_wipe(priv);
    s.own_ratchet.pub = crypto::PublicKey::from_bytes(r.take(kKeySize));
    auto remote_flag = r.u8();
    if (remote_flag > 1) throw Error(Errc::parse, "bad remote presence flag");
    if (remote_flag) s.remote_ratchet_pub = crypto::PublicKey::from_bytes(r.take(kKeySize));
    s.prev_send_len = r.u32();
    auto n_skipped = r.u32();
    if (n_skipped > kMaxSkip) throw Error(Errc::parse, "skipped-key count exceeds MAX_SKIP");
    for (std::uint32_t i = 0; i < n_skipped; ++i) {
        SkippedKeyId id{crypto::PublicKey::from_bytes(r.take(kKeySize)), 0};
        id.index = r.u32();
        s.skipped.insert_or_assign(id, MessageKey{take<crypto::kMessageKeyMaterial>(r.take(crypto::kMessageKeyMaterial))});
    }
    auto ad_len = r.u32();
    auto ad = r.take(ad_len);
    s.ad.assign(ad.begin(), ad.end());
    s.counters.dh_steps = r.u64();
    s.counters.send_steps = r.u64();
    s.counters.recv_steps = r.u64();
    if (!r.done()) throw Error(Errc::parse, "trailing bytes after ratchet state");
    return s;
}

}  // namespace ratchetlab::ratchet
