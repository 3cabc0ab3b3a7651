#include "tagdrive/crypto.hpp"

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/sha.h>

#include <cstring>
#include <memory>
#include <stdexcept>

namespace tagdrive::crypto {

namespace {

struct CipherCtxFree {
    void operator()(EVP_CIPHER_CTX* ctx) const { EVP_CIPHER_CTX_free(ctx); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxFree>;

[[noreturn]] void openssl_fail(const char* what) {
    throw std::runtime_error(std::string("openssl failure in ") + what);
}

} // namespace

std::array<uint8_t, kSha256Size> sha256(std::span<const uint8_t> data) {
    std::array<uint8_t, kSha256Size> out{};
    unsigned len = 0;
    if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 ||
        len != kSha256Size) {
        openssl_fail("EVP_Digest");
    }
    return out;
}

std::array<uint8_t, kSha256Size> hmac_sha256(std::span<const uint8_t> key,
                                             std::span<const uint8_t> data) {
    std::array<uint8_t, kSha256Size> out{};
    unsigned len = 0;
    if (HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), data.data(),
             data.size(), out.data(), &len) == nullptr ||
        len != kSha256Size) {
        openssl_fail("HMAC");
    }
    return out;
}

Bytes hkdf_sha256(std::span<const uint8_t> ikm, std::span<const uint8_t> salt,
                  std::span<const uint8_t> info, size_t length) {
    if (length == 0 || length > 255 * kSha256Size) {
        throw std::invalid_argument("hkdf output length out of range");
    }
    // RFC 5869: extract with the salt as HMAC key (zero block when empty),
    // then expand T(i) = HMAC(prk, T(i-1) || info || i).
    static const std::array<uint8_t, kSha256Size> zero_salt{};
    const auto prk = salt.empty() ? hmac_sha256(zero_salt, ikm) : hmac_sha256(salt, ikm);

    Bytes out;
    out.reserve(length);
    std::array<uint8_t, kSha256Size> block{};
    Bytes msg;
    uint8_t counter = 1;
    while (out.size() < length) {
        msg.clear();
        if (counter > 1) msg.insert(msg.end(), block.begin(), block.end());
        msg.insert(msg.end(), info.begin(), info.end());
        msg.push_back(counter);
        block = hmac_sha256(prk, msg);
        const size_t take = std::min(kSha256Size, length - out.size());
        out.insert(out.end(), block.begin(), block.begin() + take);
        ++counter;
    }
    return out;
}

Bytes aes256gcm_seal(std::span<const uint8_t> key, std::span<const uint8_t> nonce,
                     std::span<const uint8_t> aad, std::span<const uint8_t> plaintext) {
    if (key.size() != kAes256KeySize) throw std::invalid_argument("bad GCM key size");
    if (nonce.size() != kGcmNonceSize) throw std::invalid_argument("bad GCM nonce size");

    CipherCtx ctx(EVP_CIPHER_CTX_new());
    if (!ctx) openssl_fail("EVP_CIPHER_CTX_new");
    if (EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data(),
                           nonce.data()) != 1) {
        openssl_fail("EVP_EncryptInit_ex");
    }
    int len = 0;
    if (!aad.empty() &&
        EVP_EncryptUpdate(ctx.get(), nullptr, &len, aad.data(),
                          static_cast<int>(aad.size())) != 1) {
        openssl_fail("EVP_EncryptUpdate aad");
    }
    Bytes out(plaintext.size() + kGcmTagSize);
    if (!plaintext.empty() &&
        EVP_EncryptUpdate(ctx.get(), out.data(), &len, plaintext.data(),
                          static_cast<int>(plaintext.size())) != 1) {
        openssl_fail("EVP_EncryptUpdate");
    }
    int fin = 0;
    if (EVP_EncryptFinal_ex(ctx.get(), out.data() + plaintext.size(), &fin) != 1) {
        openssl_fail("EVP_EncryptFinal_ex");
    }
    if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kGcmTagSize,
                            out.data() + plaintext.size()) != 1) {
        openssl_fail("EVP_CTRL_GCM_GET_TAG");
    }
    return out;
}

std::optional<Bytes> aes256gcm_open(std::span<const uint8_t> key,
                                    std::span<const uint8_t> nonce,
                                    std::span<const uint8_t> aad,
                                    std::span<const uint8_t> ciphertext_and_tag) {
    if (key.size() != kAes256KeySize) throw std::invalid_argument("bad GCM key size");
    if (nonce.size() != kGcmNonceSize) throw std::invalid_argument("bad GCM nonce size");
    if (ciphertext_and_tag.size() < kGcmTagSize) return std::nullopt;

    const size_t ct_len = ciphertext_and_tag.size() - kGcmTagSize;
    CipherCtx ctx(EVP_CIPHER_CTX_new());
    if (!ctx) openssl_fail("EVP_CIPHER_CTX_new");
    if (EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data(),
                           nonce.data()) != 1) {
        openssl_fail("EVP_DecryptInit_ex");
    }
    int len = 0;
    if (!aad.empty() &&
        EVP_DecryptUpdate(ctx.get(), nullptr, &len, aad.data(),
                          static_cast<int>(aad.size())) != 1) {
        openssl_fail("EVP_DecryptUpdate aad");
    }
    Bytes out(ct_len);
    if (ct_len > 0 &&
        EVP_DecryptUpdate(ctx.get(), out.data(), &len, ciphertext_and_tag.data(),
                          static_cast<int>(ct_len)) != 1) {
        return std::nullopt;
    }
    uint8_t tag[kGcmTagSize];
    std::memcpy(tag, ciphertext_and_tag.data() + ct_len, kGcmTagSize);
    if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kGcmTagSize, tag) != 1) {
        openssl_fail("EVP_CTRL_GCM_SET_TAG");
    }
    int fin = 0;
    if (EVP_DecryptFinal_ex(ctx.get(), out.data() + ct_len, &fin) != 1) {
        return std::nullopt; // authentication failure
    }
    return out;
}

bool constant_time_equal(std::span<const uint8_t> a, std::span<const uint8_t> b) {
    if (a.size() != b.size()) return false;
    return CRYPTO_memcmp(a.data(), b.data(), a.size()) == 0;
}

namespace {
const char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int b64_value(char c) {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
}
} // namespace

std::string base64_encode(std::span<const uint8_t> data) {
    std::string out;
    out.reserve((data.size() + 2) / 3 * 4);
    size_t i = 0;
    for (; i + 3 <= data.size(); i += 3) {
        const uint32_t v = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
        out.push_back(kB64Alphabet[(v >> 18) & 63]);
        out.push_back(kB64Alphabet[(v >> 12) & 63]);
        out.push_back(kB64Alphabet[(v >> 6) & 63]);
        out.push_back(kB64Alphabet[v & 63]);
    }
    const size_t rest = data.size() - i;
    if (rest == 1) {
        const uint32_t v = data[i] << 16;
        out.push_back(kB64Alphabet[(v >> 18) & 63]);
        out.push_back(kB64Alphabet[(v >> 12) & 63]);
        out.append("==");
    } else if (rest == 2) {
        const uint32_t v = (data[i] << 16) | (data[i + 1] << 8);
        out.push_back(kB64Alphabet[(v >> 18) & 63]);
        out.push_back(kB64Alphabet[(v >> 12) & 63]);
        out.push_back(kB64Alphabet[(v >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

std::optional<Bytes> base64_decode(const std::string& text) {
    if (text.size() % 4 != 0) return std::nullopt;
    Bytes out;
    out.reserve(text.size() / 4 * 3);
    for (size_t i = 0; i < text.size(); i += 4) {
        int vals[4];
        int pad = 0;
        for (int j = 0; j < 4; ++j) {
            const char c = text[i + j];
            if (c == '=') {
                // Padding only in the last two positions of the final group.
                if (i + 4 != text.size() || j < 2) return std::nullopt;
                vals[j] = 0;
                ++pad;
            } else {
                if (pad > 0) return std::nullopt;
                vals[j] = b64_value(c);
                if (vals[j] < 0) return std::nullopt;
            }
        }
        const uint32_t v = (vals[0] << 18) | (vals[1] << 12) | (vals[2] << 6) | vals[3];
        out.push_back(static_cast<uint8_t>(v >> 16));
        if (pad < 2) out.push_back(static_cast<uint8_t>(v >> 8));
        if (pad < 1) out.push_back(static_cast<uint8_t>(v));
    }
    return out;
}

std::string hex_encode(std::span<const uint8_t> data) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(data.size() * 2);
    for (uint8_t b : data) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0f]);
    }
    return out;
}

std::optional<Bytes> hex_decode(const std::string& text) {
    if (text.size() % 2 != 0) return std::nullopt;
    Bytes out;
    out.reserve(text.size() / 2);
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    for (size_t i = 0; i < text.size(); i += 2) {
        const int hi = nibble(text[i]);
        const int lo = nibble(text[i + 1]);
        if (hi < 0 || lo < 0) return std::nullopt;
        out.push_back(static_cast<uint8_t>((hi << 4) | lo));
    }
    return out;
}

} // namespace tagdrive::crypto
