#include "ratchetlab/crypto/primitives.hpp"

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <algorithm>

#include "ratchetlab/crypto/constants.hpp"
#include "ratchetlab/error.hpp"

namespace ratchetlab::crypto {

namespace {
const std::uint8_t kEmpty[1] = {0};
const std::uint8_t* ptr_or_empty(ByteView v) { return v.empty() ? kEmpty : v.data(); }
}  // namespace

ByteArray<32> sha256(ByteView data) {
    ByteArray<32> out;
    unsigned int len = 0;
    if (EVP_Digest(ptr_or_empty(data), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 || len != 32)
        throw Error(Errc::internal, "SHA-256 failed");
    return out;
}

ByteArray<32> hmac_sha256(ByteView key, ByteView data) {
    ByteArray<32> out;
    unsigned int len = 0;
    if (HMAC(EVP_sha256(), ptr_or_empty(key), static_cast<int>(key.size()), ptr_or_empty(data), data.size(),
             out.data(), &len) == nullptr ||
        len != 32)
        throw Error(Errc::internal, "HMAC-SHA256 failed");
    return out;
}

SecretBytes kdf(ByteView input_key_material, ByteView salt, ByteView info, std::size_t out_len) {
    if (out_len > kKdfMaxOutput) throw Error(Errc::parameter, "HKDF output length exceeds 255 blocks");

    // Extract. An absent salt is a string of HashLen zeros.
    Secret<32> prk(hmac_sha256(salt.empty() ? ByteView(kZeroSalt) : salt, input_key_material));

    // Expand.
    SecretBytes okm(out_len);
    SecretBytes block;
    std::size_t written = 0;
    for (std::uint8_t counter = 1; written < out_len; ++counter) {
        SecretBytes input;
        input.append(block.view());
        input.append(info);
        input.append(ByteView(&counter, 1));
        block = SecretBytes(Bytes(32));
        auto t = hmac_sha256(prk.view(), input.view());
        std::copy(t.begin(), t.end(), block.mutable_view().begin());
        secure_wipe(t);
        std::size_t n = std::min<std::size_t>(32, out_len - written);
        std::copy_n(block.view().begin(), n, okm.mutable_view().begin() + static_cast<std::ptrdiff_t>(written));
        written += n;
    }
    return okm;
}

SecretBytes kdf32(ByteView input_key_material) {
    return kdf(input_key_material, kZeroSalt, to_bytes(kInfoX3dh), 32);
}

}  // namespace ratchetlab::crypto
