#include "ratchetlab/crypto/aead.hpp"

#include <openssl/evp.h>

#include "openssl_util.hpp"
#include "ratchetlab/crypto/constants.hpp"
#include "ratchetlab/crypto/primitives.hpp"
#include "ratchetlab/error.hpp"

namespace ratchetlab::crypto {

namespace {

struct SplitKey {
    ByteView enc;
    ByteView mac;
    ByteView iv;
};

SplitKey split(ByteView material) {
    if (material.size() != kMessageKeyMaterial) throw Error(Errc::malformed, "message key material must be 80 bytes");
    return {material.subspan(0, 32), material.subspan(32, 32), material.subspan(64, 16)};
}

ByteArray<32> compute_tag(ByteView mac_key, ByteView associated_data, ByteView iv_and_body) {
    Bytes mac_input = concat({associated_data, iv_and_body});
    return hmac_sha256(mac_key, mac_input);
}

}  // namespace

Bytes aead_encrypt(ByteView message_key_material, ByteView plaintext, ByteView associated_data) {
    auto key = split(message_key_material);

    detail::CipherCtxPtr ctx(EVP_CIPHER_CTX_new());
    if (!ctx || EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_cbc(), nullptr, key.enc.data(), key.iv.data()) != 1)
        throw Error(Errc::internal, "AES-256-CBC init failed");

    Bytes out(key.iv.begin(), key.iv.end());
    out.resize(kAesBlock + plaintext.size() + kAesBlock);
    int len1 = 0;
    int len2 = 0;
    static const std::uint8_t kNothing = 0;
    if (EVP_EncryptUpdate(ctx.get(), out.data() + kAesBlock, &len1, plaintext.empty() ? &kNothing : plaintext.data(),
                          static_cast<int>(plaintext.size())) != 1 ||
        EVP_EncryptFinal_ex(ctx.get(), out.data() + kAesBlock + len1, &len2) != 1)
        throw Error(Errc::internal, "AES-256-CBC encrypt failed");
    out.resize(kAesBlock + static_cast<std::size_t>(len1 + len2));

    auto tag = compute_tag(key.mac, associated_data, out);
    append(out, tag);
    return out;
}

Bytes aead_decrypt(ByteView message_key_material, ByteView ciphertext, ByteView associated_data) {
    auto key = split(message_key_material);
    if (ciphertext.size() < kAeadMinCiphertext || (ciphertext.size() - kAesBlock - kMacSize) % kAesBlock != 0)
        throw Error(Errc::malformed, "ciphertext length is not iv + blocks + tag");

    ByteView iv_and_body = ciphertext.first(ciphertext.size() - kMacSize);
    ByteView tag = ciphertext.last(kMacSize);
    auto expected = compute_tag(key.mac, associated_data, iv_and_body);
    if (!constant_time_equal(expected, tag)) throw Error(Errc::authentication, "message authentication failed");

    ByteView iv = iv_and_body.first(kAesBlock);
    ByteView body = iv_and_body.subspan(kAesBlock);

    detail::CipherCtxPtr ctx(EVP_CIPHER_CTX_new());
    if (!ctx || EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_cbc(), nullptr, key.enc.data(), iv.data()) != 1)
        throw Error(Errc::internal, "AES-256-CBC init failed");
    Bytes out(body.size() + kAesBlock);
    int len1 = 0;
    int len2 = 0;
    if (EVP_DecryptUpdate(ctx.get(), out.data(), &len1, body.data(), static_cast<int>(body.size())) != 1 ||
        EVP_DecryptFinal_ex(ctx.get(), out.data() + len1, &len2) != 1) {
        secure_wipe(out);
        throw Error(Errc::internal, "invalid padding under a valid tag");
    }
    out.resize(static_cast<std::size_t>(len1 + len2));
    return out;
}

}  // namespace ratchetlab::crypto
