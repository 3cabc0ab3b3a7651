#pragma once

// Thin wrappers over OpenSSL plus an RFC 5869 HKDF built from HMAC-SHA-256.
// Known-answer tests pin these against the published RFC/NIST vectors.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tagdrive::crypto {

using Bytes = std::vector<uint8_t>;

constexpr size_t kSha256Size = 32;
constexpr size_t kGcmNonceSize = 12;
constexpr size_t kGcmTagSize = 16;
constexpr size_t kAes256KeySize = 32;

std::array<uint8_t, kSha256Size> sha256(std::span<const uint8_t> data);

std::array<uint8_t, kSha256Size> hmac_sha256(std::span<const uint8_t> key,
                                             std::span<const uint8_t> data);

// HKDF-SHA-256 extract+expand. length <= 255 * 32.
Bytes hkdf_sha256(std::span<const uint8_t> ikm,
                  std::span<const uint8_t> salt,
                  std::span<const uint8_t> info,
                  size_t length);

// AES-256-GCM. Seal returns ciphertext || 16-byte tag; open returns nullopt
// on any authentication failure (wrong key, wrong nonce, flipped bit).
Bytes aes256gcm_seal(std::span<const uint8_t> key,
                     std::span<const uint8_t> nonce,
                     std::span<const uint8_t> aad,
                     std::span<const uint8_t> plaintext);

std::optional<Bytes> aes256gcm_open(std::span<const uint8_t> key,
                                    std::span<const uint8_t> nonce,
                                    std::span<const uint8_t> aad,
                                    std::span<const uint8_t> ciphertext_and_tag);

bool constant_time_equal(std::span<const uint8_t> a, std::span<const uint8_t> b);

std::string base64_encode(std::span<const uint8_t> data);
std::optional<Bytes> base64_decode(const std::string& text);

std::string hex_encode(std::span<const uint8_t> data);
std::optional<Bytes> hex_decode(const std::string& text);

} // namespace tagdrive::crypto
