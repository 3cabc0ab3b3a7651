#include "tagdrive/activation.hpp"

#include <algorithm>
#include <cstring>

namespace tagdrive {

namespace {

constexpr const char* kActivationInfo = "tagdrive-activation-v1";

std::array<uint8_t, crypto::kAes256KeySize>
blob_key(const PurchaseSecret& secret, std::span<const uint8_t> salt) {
    const std::string& s = secret.text();
    const auto key = crypto::hkdf_sha256(
        std::span(reinterpret_cast<const uint8_t*>(s.data()), s.size()), salt,
        std::span(reinterpret_cast<const uint8_t*>(kActivationInfo),
                  std::strlen(kActivationInfo)),
        crypto::kAes256KeySize);
    std::array<uint8_t, crypto::kAes256KeySize> out{};
    std::copy(key.begin(), key.end(), out.begin());
    return out;
}

} // namespace

std::vector<uint8_t> ActivationBlob::to_bytes() const {
    std::vector<uint8_t> out;
    out.reserve(1 + kSaltSize + crypto::kGcmNonceSize + ciphertext.size());
    out.push_back(version);
    out.insert(out.end(), salt.begin(), salt.end());
    out.insert(out.end(), nonce.begin(), nonce.end());
    out.insert(out.end(), ciphertext.begin(), ciphertext.end());
    return out;
}

ActivationBlob ActivationBlob::from_bytes(std::span<const uint8_t> bytes) {
    constexpr size_t min_size = 1 + kSaltSize + crypto::kGcmNonceSize + crypto::kGcmTagSize;
    if (bytes.size() < min_size) {
        throw BlobAuthFailure("blob too short");
    }
    ActivationBlob blob;
    blob.version = bytes[0];
    if (blob.version != kVersion) {
        throw BlobAuthFailure("unsupported blob version");
    }
    size_t pos = 1;
    std::memcpy(blob.salt.data(), bytes.data() + pos, kSaltSize);
    pos += kSaltSize;
    std::memcpy(blob.nonce.data(), bytes.data() + pos, crypto::kGcmNonceSize);
    pos += crypto::kGcmNonceSize;
    blob.ciphertext.assign(bytes.begin() + pos, bytes.end());
    return blob;
}

std::string ActivationBlob::to_base64() const {
    return crypto::base64_encode(to_bytes());
}

ActivationBlob ActivationBlob::from_base64(const std::string& text) {
    const auto bytes = crypto::base64_decode(text);
    if (!bytes.has_value()) {
        throw BlobAuthFailure("blob is not valid base64");
    }
    return from_bytes(*bytes);
}

const char* PurchaseSecret::alphabet() {
    // No I, O, 0, 1: unambiguous when printed on a package.
    return "ABCDEFGHJKLMNPQRSTUVWXYZ23456789";
}

PurchaseSecret PurchaseSecret::parse(const std::string& text) {
    if (text.size() != kLength) {
        throw MalformedText("purchase secret must be exactly " +
                            std::to_string(kLength) + " characters");
    }
    const std::string_view allowed(alphabet());
    for (char c : text) {
        if (allowed.find(c) == std::string_view::npos) {
            throw MalformedText("purchase secret contains '" + std::string(1, c) +
                                "'; allowed charset is [A-HJ-NP-Z2-9]");
        }
    }
    return PurchaseSecret(text);
}

PurchaseSecret PurchaseSecret::random(Rng& rng) {
    const std::string_view allowed(alphabet());
    std::string text;
    text.reserve(kLength);
    for (size_t i = 0; i < kLength; ++i) {
        text.push_back(allowed[rng.below(allowed.size())]);
    }
    return PurchaseSecret(std::move(text));
}

bool SerialRegistry::has(const VisibleSerial& serial) const {
    return entries_.find(serial) != entries_.end();
}

const RegistryEntry* SerialRegistry::find(const VisibleSerial& serial) const {
    const auto it = entries_.find(serial);
    return it == entries_.end() ? nullptr : &it->second;
}

void SerialRegistry::put(const VisibleSerial& serial, RegistryEntry entry) {
    if (!entries_.emplace(serial, std::move(entry)).second) {
        throw SerialCollision("serial " + serial.text() + " already registered");
    }
}

ActivationBlob seal_blob(const TagCode& code, const PurchaseSecret& secret, Rng& rng) {
    ActivationBlob blob;
    rng.fill_bytes(blob.salt);
    rng.fill_bytes(blob.nonce);
    const auto key = blob_key(secret, blob.salt);
    const uint8_t aad[1] = {blob.version};
    blob.ciphertext = crypto::aes256gcm_seal(key, blob.nonce, aad, code.bytes());
    return blob;
}

TagCode open_blob(const ActivationBlob& blob, const PurchaseSecret& secret,
                  unsigned width) {
    if (blob.version != ActivationBlob::kVersion) {
        throw BlobAuthFailure("unsupported blob version");
    }
    const auto key = blob_key(secret, blob.salt);
    const uint8_t aad[1] = {blob.version};
    const auto plain = crypto::aes256gcm_open(key, blob.nonce, aad, blob.ciphertext);
    if (!plain.has_value()) {
        throw BlobAuthFailure("blob authentication failed");
    }
    if (plain->size() != code_byte_count(width)) {
        throw WidthMismatch("blob decrypts to " + std::to_string(plain->size()) +
                            " bytes, expected " +
                            std::to_string(code_byte_count(width)) + " for width " +
                            std::to_string(width));
    }
    try {
        return TagCode::from_bytes(*plain, width);
    } catch (const MalformedText&) {
        throw WidthMismatch("blob plaintext has nonzero padding for width " +
                            std::to_string(width));
    }
}

namespace {

VisibleSerial fresh_serial(const SerialRegistry& registry, Rng& rng) {
    static const char* charset = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
    for (int attempt = 0; attempt < 5; ++attempt) {
        std::string text = "TD-";
        for (int i = 0; i < 10; ++i) {
            if (i == 5) text.push_back('-');
            text.push_back(charset[rng.below(36)]);
        }
        VisibleSerial serial = VisibleSerial::parse(text);
        if (!registry.has(serial)) return serial;
    }
    throw SerialCollision("could not mint a fresh serial after 5 attempts");
}

} // namespace

ProvisionResult provision_disc(SerialRegistry& registry, unsigned width,
                               const PurchaseSecret& secret, Rng& entropy,
                               int64_t provisioned_at,
                               const std::optional<TagCode>& forced_code,
                               FrequencyBand tag_band) {
    if (registry.width() != width) {
        throw WidthMismatch("provisioning width " + std::to_string(width) +
                            " into a width-" + std::to_string(registry.width()) +
                            " registry");
    }
    if (forced_code && forced_code->width() != width) {
        throw WidthMismatch("forced code width does not match deployment width");
    }
    const TagCode code = forced_code ? *forced_code : TagCode::random(width, entropy);
    const VisibleSerial serial = fresh_serial(registry, entropy);
    ActivationBlob blob = seal_blob(code, secret, entropy);

    registry.put(serial, RegistryEntry{blob, provisioned_at});

    return ProvisionResult{serial, RfidTag{code, tag_band, false}, std::move(blob)};
}

void activate(const ActivationBlob& blob, const PurchaseSecret& secret,
              CodeDatabase& db, const VisibleSerial& serial,
              int64_t now_utc_seconds) {
    const TagCode code = open_blob(blob, secret, db.width());
    ActivationRecord record{serial,
                            std::max(now_utc_seconds, db.latest_activation()),
                            ActivationSource::RemoteActivation};
    db.insert(code, record);
}

} // namespace tagdrive
