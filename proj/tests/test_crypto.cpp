#include <gtest/gtest.h>

#include <set>

#include "oracles.hpp"
#include "ratchetlab/crypto/aead.hpp"
#include "ratchetlab/crypto/constants.hpp"
#include "ratchetlab/crypto/entropy.hpp"
#include "ratchetlab/crypto/keys.hpp"
#include "ratchetlab/crypto/primitives.hpp"
#include "ratchetlab/crypto/signature.hpp"
#include "ratchetlab/encoding.hpp"
#include "ratchetlab/error.hpp"
#include "support.hpp"

using namespace ratchetlab;
using namespace ratchetlab::crypto;

namespace {

Errc code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an Error";
    return Errc::internal;
}

Bytes key_material(std::uint8_t fill) { return Bytes(kMessageKeyMaterial, fill); }

}  // namespace

// --- keys and X25519 ---

TEST(Keys, GeneratedKeysAreClamped) {
    DeterministicEntropy rng(1);
    for (int i = 0; i < 200; ++i) {
        auto kp = generate_keypair(rng);
        auto s = kp.priv.view();
        EXPECT_EQ(s[0] & 7, 0);
        EXPECT_EQ(s[31] & 0x80, 0);
        EXPECT_EQ(s[31] & 0x40, 0x40);
    }
}

TEST(Keys, ZeroSeedIsRepeatableAndMatchesOracle) {
    FixedEntropy e1(Bytes(32, 0)), e2(Bytes(32, 0));
    auto a = generate_keypair(e1);
    auto b = generate_keypair(e2);
    EXPECT_EQ(a.pub, b.pub);
    EXPECT_EQ(to_hex(a.pub.view()), "2fe57da347cd62431528daac5fbb290730fff684afc4cfc2ed90995f58cb3b74");
    EXPECT_EQ(a.pub.bytes(), oracle::x25519_base(Bytes(32, 0)));
}

TEST(Keys, Seed77MatchesIndependentLadder) {
    FixedEntropy e(Bytes(32, 0x77));
    auto kp = generate_keypair(e);
    EXPECT_EQ(kp.pub.bytes(), oracle::x25519_base(Bytes(32, 0x77)));
    EXPECT_EQ(to_hex(kp.pub.view()), "1cf579aba45a10ba1d1ef06d91fca2aa9ed0a1150515653155405d0b18cb9a67");
}

TEST(Keys, DistinctSeedsGiveDistinctKeys) {
    FixedEntropy e1(Bytes(32, 1)), e2(Bytes(32, 2));
    EXPECT_NE(generate_keypair(e1).pub, generate_keypair(e2).pub);
}

TEST(Keys, PublicKeyIsRederivable) {
    DeterministicEntropy rng(9);
    auto kp = generate_keypair(rng);
    EXPECT_EQ(keypair_from_private(kp.priv).pub, kp.pub);
}

TEST(Keys, EntropyExhaustionIsGenerationError) {
    FixedEntropy short_source(Bytes(31, 0xaa));
    EXPECT_EQ(code_of([&] { generate_keypair(short_source); }), Errc::generation);
}

TEST(Keys, PublicKeyLengthGate) {
    EXPECT_EQ(code_of([] { PublicKey::from_bytes(Bytes(31)); }), Errc::malformed);
    EXPECT_EQ(code_of([] { PublicKey::from_bytes(Bytes(33)); }), Errc::malformed);
    EXPECT_NO_THROW(PublicKey::from_bytes(Bytes(32, 9)));
}

TEST(Dh, Symmetry) {
    DeterministicEntropy rng(2);
    for (int i = 0; i < 50; ++i) {
        auto a = generate_keypair(rng);
        auto b = generate_keypair(rng);
        EXPECT_EQ(dh(a.priv, b.pub).bytes, dh(b.priv, a.pub).bytes);
    }
}

TEST(Dh, Rfc7748Vectors) {
    auto run = [](std::string_view k, std::string_view u) {
        ByteArray<32> raw{};
        auto kb = from_hex(k);
        std::copy(kb.begin(), kb.end(), raw.begin());
        return to_hex(dh(PrivateKey(raw), PublicKey::from_bytes(from_hex(u))).bytes.view());
    };
    EXPECT_EQ(run("a546e36bf0527c9d3b16154b82465edd62144c0ac1fc5a18506a2244ba449ac4",
                  "e6db6867583030db3594c1a424b15f7c726624ec26b3353b10a903a6d0ab1c4c"),
              "c3da55379de9c6908e94ea4df28d084f32eccf03491c71f754b4075577a28552");
    EXPECT_EQ(run("4b66e9d4d1b4673c5ad22691957d6af5c11b6421e0ea01d42ca4169e7918ba0d",
                  "e5210f12786811d3f4b7959d0538ae2c31dbe7106fc03c3efc4cd549c715a493"),
              "95cbde9476e8907d7aade45cb4b873f88b595a68799fa152e6f8f7647aac7957");
}

TEST(Dh, OracleAgreesOnRandomInputs) {
    DeterministicEntropy rng(3);
    for (int i = 0; i < 40; ++i) {
        auto a = generate_keypair(rng);
        auto b = generate_keypair(rng);
        EXPECT_EQ(a.pub.bytes(), oracle::x25519_base(a.priv.view()));
        auto expected = oracle::x25519(a.priv.view(), b.pub.view());
        EXPECT_TRUE(std::equal(expected.begin(), expected.end(), dh(a.priv, b.pub).bytes.view().begin()));
    }
}

TEST(Dh, LowOrderPointsRejected) {
    // Points of order 1, 2, 4 and 8 on Curve25519 and their non-canonical aliases.
    const char* points[] = {
        "0000000000000000000000000000000000000000000000000000000000000000",
        "0100000000000000000000000000000000000000000000000000000000000000",
        "e0eb7a7c3b41b8ae1656e3faf19fc46ada098deb9c32b1fd866205165f49b800",
        "5f9c95bca3508c24b1d0b1559c83ef5b04445cc4581c8e86d8224eddd09f1157",
        "ecffffffffffffffffffffffffffffffffffffffffffffffffffffffffffff7f",
        "edffffffffffffffffffffffffffffffffffffffffffffffffffffffffffff7f",
        "eeffffffffffffffffffffffffffffffffffffffffffffffffffffffffffff7f",
    };
    DeterministicEntropy rng(4);
    auto own = generate_keypair(rng);
    for (const char* p : points) {
        SCOPED_TRACE(p);
        // The oracle confirms these really collapse to zero.
        auto z = oracle::x25519(own.priv.view(), from_hex(p));
        EXPECT_TRUE(std::all_of(z.begin(), z.end(), [](auto b) { return b == 0; }));
        EXPECT_EQ(code_of([&] { dh(own.priv, PublicKey::from_bytes(from_hex(p))); }), Errc::contributory);
    }
}

// --- HMAC and HKDF ---

TEST(Hmac, Rfc4231) {
    EXPECT_EQ(to_hex(hmac_sha256(Bytes(20, 0x0b), to_bytes("Hi There"))),
              "b0344c61d8db38535ca8afceaf0bf12b881dc200c9833da726e9376c2e32cff7");
    EXPECT_EQ(to_hex(hmac_sha256(to_bytes("Jefe"), to_bytes("what do ya want for nothing?"))),
              "5bdcc146bf60754e6a042426089575c75a003f089d2739839dec58b964ec3843");
}

TEST(Hmac, DeterministicAndBitSensitive) {
    Bytes data = to_bytes("message under test");
    auto t1 = hmac_sha256(Bytes(32, 1), data);
    EXPECT_EQ(t1, hmac_sha256(Bytes(32, 1), data));
    for (std::size_t bit = 0; bit < data.size() * 8; ++bit) {
        Bytes flipped = data;
        flipped[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
        EXPECT_NE(hmac_sha256(Bytes(32, 1), flipped), t1);
    }
}

TEST(Kdf, Rfc5869) {
    auto okm = kdf(Bytes(22, 0x0b), from_hex("000102030405060708090a0b0c"), from_hex("f0f1f2f3f4f5f6f7f8f9"), 42);
    EXPECT_EQ(to_hex(okm.view()),
              "3cb25f25faacd57a90434f64d0362f2a2d2d0a90cf1a5a4c5db02d56ecc4c5bf34007208d5b887185865");
    EXPECT_EQ(to_hex(kdf(Bytes(22, 0x0b), {}, {}, 42).view()),
              "8da4e775a563c18f715f802a063c5a31b8a11f5c5ee1879ec3454e5f3c738d2d9d201395faa4b61a96c8");
}

TEST(Kdf, MatchesOpenSslHkdfAcrossLengths) {
    DeterministicEntropy rng(5);
    for (std::size_t len : {1u, 31u, 32u, 33u, 64u, 80u, 255u, 1000u, 8160u}) {
        Bytes ikm(37), salt(len % 2 ? 0 : 19), info(11);
        rng.fill(ikm);
        rng.fill(salt);
        rng.fill(info);
        auto ours = kdf(ikm, salt, info, len);
        auto theirs = oracle::hkdf(ikm, salt, info, len);
        EXPECT_TRUE(std::equal(theirs.begin(), theirs.end(), ours.view().begin(), ours.view().end())) << len;
    }
}

TEST(Kdf, InfoSeparatesOutputs) {
    Bytes ikm(32, 3);
    auto a = kdf(ikm, {}, to_bytes(kInfoRootStep), 32);
    auto b = kdf(ikm, {}, to_bytes(kInfoMessageKey), 32);
    EXPECT_FALSE(constant_time_equal(a.view(), b.view()));
    auto oa = oracle::hkdf(ikm, {}, to_bytes(kInfoRootStep), 32);
    auto ob = oracle::hkdf(ikm, {}, to_bytes(kInfoMessageKey), 32);
    EXPECT_TRUE(std::equal(oa.begin(), oa.end(), a.view().begin()));
    EXPECT_TRUE(std::equal(ob.begin(), ob.end(), b.view().begin()));
    EXPECT_TRUE(constant_time_equal(kdf(ikm, {}, to_bytes("x"), 32).view(), kdf(ikm, {}, to_bytes("x"), 32).view()));
}

TEST(Kdf, OutputBound) {
    EXPECT_EQ(kdf(Bytes(8), {}, {}, kKdfMaxOutput).size(), kKdfMaxOutput);
    EXPECT_EQ(code_of([] { kdf(Bytes(8), {}, {}, kKdfMaxOutput + 1); }), Errc::parameter);
}

TEST(Kdf, Kdf32UsesX3dhInfo) {
    Bytes ikm(64, 0x42);
    auto expected = oracle::hkdf(ikm, {}, to_bytes("x3dh-sk-v1"), 32);
    auto got = kdf32(ikm);
    EXPECT_EQ(got.size(), 32u);
    EXPECT_TRUE(std::equal(expected.begin(), expected.end(), got.view().begin()));
}

// --- AEAD ---

TEST(Aead, RoundTrip) {
    DeterministicEntropy rng(6);
    for (std::size_t len : {0u, 1u, 15u, 16u, 17u, 100u, 4096u}) {
        Bytes key(kMessageKeyMaterial), pt(len), ad(23);
        rng.fill(key);
        rng.fill(pt);
        rng.fill(ad);
        auto ct = aead_encrypt(key, pt, ad);
        EXPECT_EQ(ct.size(), 16 + (len / 16 + 1) * 16 + 32);
        EXPECT_EQ(aead_decrypt(key, ct, ad), pt);
    }
}

TEST(Aead, EmptyPlaintextIsOneBlockPlusTag) {
    auto ct = aead_encrypt(key_material(1), {}, {});
    EXPECT_EQ(ct.size(), kAeadMinCiphertext);
    EXPECT_TRUE(aead_decrypt(key_material(1), ct, {}).empty());
}

TEST(Aead, LayoutIsIvCbcTag) {
    Bytes key = key_material(0);
    for (std::size_t i = 0; i < key.size(); ++i) key[i] = static_cast<std::uint8_t>(i);
    Bytes ad = to_bytes("ad");
    auto ct = aead_encrypt(key, to_bytes("payload"), ad);
    EXPECT_TRUE(std::equal(key.begin() + 64, key.end(), ct.begin()));
    Bytes mac_input = ad;
    mac_input.insert(mac_input.end(), ct.begin(), ct.end() - 32);
    auto tag = oracle::hmac(ByteView(key).subspan(32, 32), mac_input);
    EXPECT_TRUE(std::equal(tag.begin(), tag.end(), ct.end() - 32));
}

TEST(Aead, EveryBitFlipOfCiphertextOrAdIsRejected) {
    Bytes key = key_material(7);
    Bytes ad = to_bytes("associated-data");
    auto ct = aead_encrypt(key, to_bytes("attack at dawn"), ad);
    for (std::size_t bit = 0; bit < ct.size() * 8; ++bit) {
        Bytes t = ct;
        t[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
        EXPECT_EQ(code_of([&] { aead_decrypt(key, t, ad); }), Errc::authentication) << bit;
    }
    for (std::size_t bit = 0; bit < ad.size() * 8; ++bit) {
        Bytes a = ad;
        a[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
        EXPECT_EQ(code_of([&] { aead_decrypt(key, ct, a); }), Errc::authentication);
    }
}

TEST(Aead, LengthGates) {
    auto ct = aead_encrypt(key_material(2), to_bytes("x"), {});
    Bytes truncated(ct.begin(), ct.end() - 1);
    EXPECT_EQ(code_of([&] { aead_decrypt(key_material(2), truncated, {}); }), Errc::malformed);
    EXPECT_EQ(code_of([&] { aead_decrypt(key_material(2), Bytes(63), {}); }), Errc::malformed);
    EXPECT_EQ(code_of([&] { aead_decrypt(key_material(2), Bytes(72), {}); }), Errc::malformed);
}

TEST(Aead, BadPaddingUnderValidTagIsInternal) {
    // Hand-build a ciphertext whose CBC body decrypts to invalid padding, then MAC it.
    Bytes key = key_material(9);
    Bytes body(16 + 16, 0x5a);
    std::copy(key.begin() + 64, key.end(), body.begin());
    Bytes mac_input = body;
    auto tag = oracle::hmac(ByteView(key).subspan(32, 32), mac_input);
    body.insert(body.end(), tag.begin(), tag.end());
    Errc c = code_of([&] { aead_decrypt(key, body, {}); });
    EXPECT_EQ(c, Errc::internal);
}

// --- signatures ---

TEST(Signature, SignVerify) {
    DeterministicEntropy rng(10);
    auto alice = generate_keypair(rng);
    auto mallory = generate_keypair(rng);
    auto spk = generate_keypair(rng);
    Bytes enc = encode_public(spk.pub);
    auto sig = sign_prekey(alice, enc);
    EXPECT_TRUE(verify_prekey(signing_public_key(alice), enc, sig.view()));
    EXPECT_EQ(sig, sign_prekey(alice, enc));
    EXPECT_FALSE(verify_prekey(signing_public_key(mallory), enc, sig.view()));
    for (std::size_t bit = 0; bit < kSignatureSize * 8; bit += 7) {
        Signature s = sig;
        s.mutable_bytes()[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
        EXPECT_FALSE(verify_prekey(signing_public_key(alice), enc, s.view()));
    }
    Bytes other = enc;
    other[5] ^= 1;
    EXPECT_FALSE(verify_prekey(signing_public_key(alice), other, sig.view()));
}

TEST(Signature, MalformedLengthIsFalse) {
    DeterministicEntropy rng(11);
    auto id = generate_keypair(rng);
    Bytes enc = encode_public(generate_keypair(rng).pub);
    auto sig = sign_prekey(id, enc);
    Bytes short_sig(sig.view().begin(), sig.view().end() - 1);
    EXPECT_FALSE(verify_prekey(signing_public_key(id), enc, short_sig));
    EXPECT_FALSE(verify_prekey(signing_public_key(id), enc, Bytes{}));
}

TEST(Signature, SigningKeyDerivedFromIdentity) {
    DeterministicEntropy rng(12);
    auto id = generate_keypair(rng);
    EXPECT_EQ(signing_public_key(id), signing_public_key(keypair_from_private(id.priv)));
    EXPECT_EQ(identity_public(id).dh, id.pub);
}

// --- encoding and entropy ---

TEST(Encoding, PublicKeyRoundTrip) {
    DeterministicEntropy rng(13);
    auto k = generate_keypair(rng).pub;
    Bytes e = encode_public(k);
    ASSERT_EQ(e.size(), 33u);
    EXPECT_EQ(e[0], 0x05);
    EXPECT_EQ(decode_public(e), k);
    EXPECT_EQ(code_of([&] { decode_public(ByteView(e).subspan(1)); }), Errc::parse);
    e[0] = 0x06;
    EXPECT_EQ(code_of([&] { decode_public(e); }), Errc::parse);
}

TEST(Entropy, DeterministicStreamIsHashCounter) {
    DeterministicEntropy a(42), b(42), c(43);
    Bytes x(100), y(100), z(100);
    a.fill(x);
    b.fill(y);
    c.fill(z);
    EXPECT_EQ(x, y);
    EXPECT_NE(x, z);
    // Chunked reads see the same stream as one big read.
    DeterministicEntropy d(42);
    Bytes w(100);
    d.fill(std::span(w).first(7));
    d.fill(std::span(w).subspan(7));
    EXPECT_EQ(w, x);
}

TEST(Secret, WipeZeroes) {
    Secret<32> s(ByteArray<32>{1, 2, 3});
    s.wipe();
    for (auto b : s.view()) EXPECT_EQ(b, 0);
}
