#include "ratchetlab/encoding.hpp"

#include "ratchetlab/error.hpp"

namespace ratchetlab {

Bytes encode_public(const crypto::PublicKey& key) {
    Bytes out;
    out.reserve(kEncodedKeySize);
    out.push_back(kKeyTypeByte);
    append(out, key.view());
    return out;
}

crypto::PublicKey decode_public(ByteView encoded) {
    if (encoded.size() != kEncodedKeySize) throw Error(Errc::parse, "encoded public key must be 33 bytes");
    if (encoded[0] != kKeyTypeByte) throw Error(Errc::parse, "unknown public key type byte");
    return crypto::PublicKey::from_bytes(encoded.subspan(1));
}

}  // namespace ratchetlab
