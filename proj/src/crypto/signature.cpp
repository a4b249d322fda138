#include "ratchetlab/crypto/signature.hpp"

#include <openssl/evp.h>

#include <algorithm>

#include "openssl_util.hpp"
#include "ratchetlab/crypto/constants.hpp"
#include "ratchetlab/crypto/primitives.hpp"
#include "ratchetlab/error.hpp"

namespace ratchetlab::crypto {

namespace {

detail::PkeyPtr signing_key(const KeyPair& identity) {
    SecretBytes seed = kdf(identity.priv.view(), kZeroSalt, to_bytes(kInfoSigningKey), 32);
    detail::PkeyPtr pkey(EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, seed.view().data(), 32));
    if (!pkey) throw Error(Errc::internal, "Ed25519 key import failed");
    return pkey;
}

}  // namespace

SigningPublicKey signing_public_key(const KeyPair& identity) {
    auto pkey = signing_key(identity);
    ByteArray<kKeySize> pub;
    std::size_t len = pub.size();
    if (EVP_PKEY_get_raw_public_key(pkey.get(), pub.data(), &len) != 1 || len != kKeySize)
        throw Error(Errc::internal, "Ed25519 public key export failed");
    return SigningPublicKey(pub);
}

IdentityPublic identity_public(const KeyPair& identity) { return {identity.pub, signing_public_key(identity)}; }

Signature sign_prekey(const KeyPair& identity, ByteView encoded_spk) {
    auto pkey = signing_key(identity);
    detail::MdCtxPtr ctx(EVP_MD_CTX_new());
    ByteArray<kSignatureSize> sig;
    std::size_t len = sig.size();
    if (!ctx || EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, pkey.get()) != 1 ||
        EVP_DigestSign(ctx.get(), sig.data(), &len, encoded_spk.data(), encoded_spk.size()) != 1 ||
        len != kSignatureSize)
        throw Error(Errc::internal, "Ed25519 signing failed");
    return Signature(sig);
}

bool verify_prekey(const SigningPublicKey& identity_signing, ByteView encoded_spk, ByteView signature) {
    if (signature.size() != kSignatureSize) return false;
    detail::PkeyPtr pkey(
        EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, identity_signing.bytes().data(), kKeySize));
    if (!pkey) return false;
    detail::MdCtxPtr ctx(EVP_MD_CTX_new());
    if (!ctx || EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr, pkey.get()) != 1) return false;
    return EVP_DigestVerify(ctx.get(), signature.data(), signature.size(), encoded_spk.data(), encoded_spk.size()) == 1;
}

}  // namespace ratchetlab::crypto
