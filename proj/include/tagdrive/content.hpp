#pragma once

// Sealed disc images: every sector AEAD-encrypted under a key derived from
// (tag code, visible serial), plus a whole-image tag so truncation or any
// bit flip fails loudly. Opening is all-or-nothing.

#include <cstdint>
#include <string>
#include <vector>

#include "tagdrive/crypto.hpp"
#include "tagdrive/rng.hpp"
#include "tagdrive/types.hpp"

namespace tagdrive {

struct SealedSector {
    std::array<uint8_t, crypto::kGcmNonceSize> nonce{};
    std::vector<uint8_t> ciphertext; // payload + 16-byte tag

    bool operator==(const SealedSector&) const = default;
};

struct SealedImage {
    static constexpr uint8_t kVersion = 1;
    static constexpr uint32_t kDefaultSectorSize = 2048;

    uint8_t version = kVersion;
    std::string serial;       // VisibleSerial text of the disc this binds to
    uint32_t sector_size = kDefaultSectorSize;
    std::vector<SealedSector> sectors;
    std::array<uint8_t, crypto::kSha256Size> image_tag{}; // HMAC over all preceding bytes

    uint32_t sector_count() const { return static_cast<uint32_t>(sectors.size()); }

    bool operator==(const SealedImage&) const = default;
};

// HKDF-SHA-256(code bytes, salt = serial bytes, info = "tagdrive-content-v1").
std::array<uint8_t, crypto::kAes256KeySize>
derive_content_key(const TagCode& code, const VisibleSerial& serial);

// Seals sector payloads (each <= sector_size, throws OversizeSector).
// Nonces come from the rng, so sealing twice yields different ciphertexts
// for the same plaintext.
SealedImage seal_content(const std::vector<std::vector<uint8_t>>& sectors,
                         const TagCode& code, const VisibleSerial& serial,
                         Rng& rng,
                         uint32_t sector_size = SealedImage::kDefaultSectorSize);

// Returns the exact sealed payloads or throws; on ContentAuthFailure (wrong
// code, wrong serial, tampered byte -- indistinguishable by design) nothing
// is released.
std::vector<std::vector<uint8_t>> open_content(const SealedImage& image,
                                               const TagCode& code,
                                               const VisibleSerial& serial);

// Bit-exact file layout: "TDIMG1" || u32be header length || header JSON ||
// sector records || 32-byte image tag. Each sector record is nonce(12) ||
// u32be ciphertext length || ciphertext.
std::vector<uint8_t> image_to_bytes(const SealedImage& image);
SealedImage image_from_bytes(std::span<const uint8_t> bytes); // throws HeaderCorrupt

void save_image(const SealedImage& image, const std::string& path);
SealedImage load_image(const std::string& path);

} // namespace tagdrive
