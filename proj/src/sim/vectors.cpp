#include "ratchetlab/sim/vectors.hpp"

#include "ratchetlab/bytes.hpp"
#include "ratchetlab/crypto/keys.hpp"
#include "ratchetlab/crypto/primitives.hpp"
#include "ratchetlab/crypto/toy_dh.hpp"

namespace ratchetlab::sim {

namespace {

using namespace ratchetlab::crypto;

PublicKey pub(std::string_view hex) { return PublicKey::from_bytes(from_hex(hex)); }

PrivateKey priv(std::string_view hex) {
    Bytes b = from_hex(hex);
    ByteArray<kKeySize> raw{};
    std::copy(b.begin(), b.end(), raw.begin());
    return PrivateKey(raw);
}

}  // namespace

std::vector<VectorResult> run_primitive_vectors() {
    std::vector<VectorResult> out;

    out.push_back({"hmac-sha256 tc1", "RFC 4231 4.2",
                   "b0344c61d8db38535ca8afceaf0bf12b881dc200c9833da726e9376c2e32cff7",
                   to_hex(hmac_sha256(Bytes(20, 0x0b), to_bytes("Hi There")))});
    out.push_back({"hmac-sha256 tc2", "RFC 4231 4.3",
                   "5bdcc146bf60754e6a042426089575c75a003f089d2739839dec58b964ec3843",
                   to_hex(hmac_sha256(to_bytes("Jefe"), to_bytes("what do ya want for nothing?")))});

    out.push_back({"hkdf-sha256 basic", "RFC 5869 A.1",
                   "3cb25f25faacd57a90434f64d0362f2a2d2d0a90cf1a5a4c5db02d56ecc4c5bf34007208d5b887185865",
                   to_hex(kdf(Bytes(22, 0x0b), from_hex("000102030405060708090a0b0c"),
                              from_hex("f0f1f2f3f4f5f6f7f8f9"), 42)
                              .view())});
    out.push_back({"hkdf-sha256 empty salt/info", "RFC 5869 A.3",
                   "8da4e775a563c18f715f802a063c5a31b8a11f5c5ee1879ec3454e5f3c738d2d9d201395faa4b61a96c8",
                   to_hex(kdf(Bytes(22, 0x0b), {}, {}, 42).view())});

    auto x25519 = [](std::string_view scalar, std::string_view u) {
        return to_hex(dh(priv(scalar), pub(u)).bytes.view());
    };
    out.push_back({"x25519 scalar mult 1", "RFC 7748 5.2",
                   "c3da55379de9c6908e94ea4df28d084f32eccf03491c71f754b4075577a28552",
                   x25519("a546e36bf0527c9d3b16154b82465edd62144c0ac1fc5a18506a2244ba449ac4",
                          "e6db6867583030db3594c1a424b15f7c726624ec26b3353b10a903a6d0ab1c4c")});
    out.push_back({"x25519 scalar mult 2", "RFC 7748 5.2",
                   "95cbde9476e8907d7aade45cb4b873f88b595a68799fa152e6f8f7647aac7957",
                   x25519("4b66e9d4d1b4673c5ad22691957d6af5c11b6421e0ea01d42ca4169e7918ba0d",
                          "e5210f12786811d3f4b7959d0538ae2c31dbe7106fc03c3efc4cd549c715a493")});

    const char* alice = "77076d0a7318a57d3c16c17251b26645df4c2f87ebc0992ab177fba51db92c2a";
    const char* bob = "5dab087e624a8a4b79e17f8b83800ee66f3bb1292618b6fd1c2f8b27ff88e0eb";
    out.push_back({"x25519 alice public", "RFC 7748 6.1",
                   "8520f0098930a754748b7ddcb43ef75a0dbf3a0d26381af4eba4a98eaa9b4e6a",
                   to_hex(keypair_from_private(priv(alice)).pub.view())});
    out.push_back({"x25519 bob public", "RFC 7748 6.1",
                   "de9edb7d7b7dc1b4d35b61c2ece435373f8343c85b78674dadfc7e146f882b4f",
                   to_hex(keypair_from_private(priv(bob)).pub.view())});
    out.push_back({"x25519 shared (alice side)", "RFC 7748 6.1",
                   "4a5d9d5ba4ce2de1728e3bf480350f25e07e21c947d19e3376f09b3c1e161742",
                   to_hex(dh(priv(alice), keypair_from_private(priv(bob)).pub).bytes.view())});
    out.push_back({"x25519 shared (bob side)", "RFC 7748 6.1",
                   "4a5d9d5ba4ce2de1728e3bf480350f25e07e21c947d19e3376f09b3c1e161742",
                   to_hex(dh(priv(bob), keypair_from_private(priv(alice)).pub).bytes.view())});

    auto toy = toy::toy_dh_roundtrip({5, 23}, 4, 3);
    out.push_back({"toy dh B=5 G=23 x=4 y=3", "worked example", "X=4 Y=10 S=18",
                   "X=" + std::to_string(toy.x_public) + " Y=" + std::to_string(toy.y_public) +
                       " S=" + std::to_string(toy.shared)});
    return out;
}

}  // namespace ratchetlab::sim
