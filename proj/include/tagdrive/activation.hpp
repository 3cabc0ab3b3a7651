#pragma once

// Vendor side of the two-serial scheme: mint (visible serial, tag code)
// pairs, publish the tag code only as an AEAD blob unlocked by the purchase
// secret, and feed activated codes into the local authorized-code database.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tagdrive/crypto.hpp"
#include "tagdrive/rng.hpp"
#include "tagdrive/types.hpp"

namespace tagdrive {

// Binary layout (before base64): version(1) || salt(16) || nonce(12) ||
// ciphertext+tag. Key = HKDF-SHA-256(secret, salt, "tagdrive-activation-v1").
struct ActivationBlob {
    static constexpr uint8_t kVersion = 1;
    static constexpr size_t kSaltSize = 16;

    uint8_t version = kVersion;
    std::array<uint8_t, kSaltSize> salt{};
    std::array<uint8_t, crypto::kGcmNonceSize> nonce{};
    std::vector<uint8_t> ciphertext; // code bytes + 16-byte tag

    std::vector<uint8_t> to_bytes() const;
    static ActivationBlob from_bytes(std::span<const uint8_t> bytes); // throws BlobAuthFailure

    std::string to_base64() const;
    static ActivationBlob from_base64(const std::string& text); // throws BlobAuthFailure

    bool operator==(const ActivationBlob&) const = default;
};

// 16 characters from [A-HJ-NP-Z2-9] (32 glyphs, 5 bits each = 80 bits),
// printed on the retail package. Never stored server-side.
class PurchaseSecret {
public:
    static constexpr size_t kLength = 16;
    static const char* alphabet(); // the 32 unambiguous glyphs

    static PurchaseSecret parse(const std::string& text); // throws MalformedText
    static PurchaseSecret random(Rng& rng);

    const std::string& text() const { return text_; }

private:
    explicit PurchaseSecret(std::string text) : text_(std::move(text)) {}
    std::string text_;
};

struct RegistryEntry {
    ActivationBlob blob;
    int64_t provisioned_at = 0; // UTC seconds

    bool operator==(const RegistryEntry&) const = default;
};

// Vendor-side map of visible serial -> published blob.
class SerialRegistry {
public:
    explicit SerialRegistry(unsigned width = TagCode::kDefaultWidth) : width_(width) {}

    unsigned width() const { return width_; }
    size_t size() const { return entries_.size(); }

    bool has(const VisibleSerial& serial) const;
    const RegistryEntry* find(const VisibleSerial& serial) const;
    void put(const VisibleSerial& serial, RegistryEntry entry); // throws SerialCollision

    const std::map<VisibleSerial, RegistryEntry>& entries() const { return entries_; }

    bool operator==(const SerialRegistry&) const = default;

private:
    unsigned width_;
    std::map<VisibleSerial, RegistryEntry> entries_;
};

ActivationBlob seal_blob(const TagCode& code, const PurchaseSecret& secret, Rng& rng);

// Recovers the code or throws BlobAuthFailure; width comes from the
// deployment (plaintext length and padding are checked against it).
TagCode open_blob(const ActivationBlob& blob, const PurchaseSecret& secret,
                  unsigned width);

struct ProvisionResult {
    VisibleSerial serial;
    RfidTag tag;
    ActivationBlob blob;
};

// Mints a fresh code (uniform over the width unless forced_code injects the
// entropy), a fresh serial, and the published blob; updates the registry.
ProvisionResult provision_disc(SerialRegistry& registry, unsigned width,
                               const PurchaseSecret& secret, Rng& entropy,
                               int64_t provisioned_at,
                               const std::optional<TagCode>& forced_code = std::nullopt,
                               FrequencyBand tag_band = FrequencyBand::HF_13_56MHz);

// Decrypts the blob and inserts the code into the local database with a
// RemoteActivation record. Idempotent; the database is untouched on failure.
void activate(const ActivationBlob& blob, const PurchaseSecret& secret,
              CodeDatabase& db, const VisibleSerial& serial,
              int64_t now_utc_seconds);

} // namespace tagdrive
