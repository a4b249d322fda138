#include "ratchetlab/wire.hpp"

#include "ratchetlab/encoding.hpp"
#include "ratchetlab/error.hpp"

namespace ratchetlab::wire {

namespace {

class Cursor {
public:
    explicit Cursor(ByteView data) : data_(data) {}

    ByteView take(std::size_t n) {
        if (data_.size() - pos_ < n) throw Error(Errc::parse, "envelope truncated");
        auto out = data_.subspan(pos_, n);
        pos_ += n;
        return out;
    }
    std::uint8_t u8() { return take(1)[0]; }
    std::uint32_t u32() { return get_u32_be(take(4)); }
    crypto::PublicKey key() { return decode_public(take(kEncodedKeySize)); }
    Bytes length_prefixed() {
        auto len = u32();
        if (len != data_.size() - pos_) throw Error(Errc::parse, "ciphertext length does not match envelope size");
        auto body = take(len);
        return Bytes(body.begin(), body.end());
    }

private:
    ByteView data_;
    std::size_t pos_ = 0;
};

void put_prelude(Bytes& out, Kind kind) {
    out.push_back(kVersion);
    out.push_back(static_cast<std::uint8_t>(kind));
}

void put_body(Bytes& out, ByteView ciphertext) {
    put_u32_be(out, static_cast<std::uint32_t>(ciphertext.size()));
    append(out, ciphertext);
}

Cursor expect(ByteView data, Kind want) {
    if (peek_kind(data) != want) throw Error(Errc::parse, "unexpected envelope kind");
    Cursor c(data);
    c.take(2);
    return c;
}

}  // namespace

Kind peek_kind(ByteView data) {
    if (data.size() < 2) throw Error(Errc::parse, "envelope shorter than its prelude");
    if (data[0] != kVersion) throw Error(Errc::parse, "unknown envelope version");
    if (data[1] != static_cast<std::uint8_t>(Kind::initial) && data[1] != static_cast<std::uint8_t>(Kind::normal))
        throw Error(Errc::parse, "unknown envelope kind");
    return static_cast<Kind>(data[1]);
}

Bytes seal_initial(const x3dh::InitialMessage& msg) {
    Bytes out;
    put_prelude(out, Kind::initial);
    append(out, encode_public(msg.sender_identity));
    append(out, encode_public(msg.ephemeral));
    put_u32_be(out, msg.spk_id);
    out.push_back(msg.opk_id ? 0x01 : 0x00);
    if (msg.opk_id) put_u32_be(out, *msg.opk_id);
    put_body(out, msg.ciphertext);
    return out;
}

Bytes seal_normal(const NormalMessage& msg) {
    Bytes out;
    put_prelude(out, Kind::normal);
    append(out, msg.header.encode());
    put_body(out, msg.ciphertext);
    return out;
}

Bytes seal(const Envelope& env) {
    return std::visit(
        [](const auto& m) {
            if constexpr (std::is_same_v<std::decay_t<decltype(m)>, NormalMessage>) return seal_normal(m);
            else return seal_initial(m);
        },
        env);
}

x3dh::InitialMessage open_initial(ByteView data) {
    Cursor c = expect(data, Kind::initial);
    x3dh::InitialMessage msg;
    msg.sender_identity = c.key();
    msg.ephemeral = c.key();
    msg.spk_id = c.u32();
    switch (c.u8()) {
        case 0x00: break;
        case 0x01: msg.opk_id = c.u32(); break;
        default: throw Error(Errc::parse, "invalid one-time prekey flag");
    }
    msg.ciphertext = c.length_prefixed();
    return msg;
}

NormalMessage open_normal(ByteView data) {
    Cursor c = expect(data, Kind::normal);
    NormalMessage msg;
    msg.header.ratchet_pub = c.key();
    msg.header.prev_chain_len = c.u32();
    msg.header.msg_index = c.u32();
    msg.ciphertext = c.length_prefixed();
    return msg;
}

Envelope open(ByteView data) {
    if (peek_kind(data) == Kind::initial) return open_initial(data);
    return open_normal(data);
}

}  // namespace ratchetlab::wire
