#include "tagdrive/content.hpp"

#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "tagdrive/persist.hpp"

namespace tagdrive {

namespace {

constexpr char kMagic[] = {'T', 'D', 'I', 'M', 'G', '1'};
constexpr size_t kMagicSize = sizeof(kMagic);
constexpr const char* kContentInfo = "tagdrive-content-v1";

void put_u32be(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v >> 24));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

uint32_t get_u32be(std::span<const uint8_t> in, size_t offset) {
    return (static_cast<uint32_t>(in[offset]) << 24) |
           (static_cast<uint32_t>(in[offset + 1]) << 16) |
           (static_cast<uint32_t>(in[offset + 2]) << 8) |
           static_cast<uint32_t>(in[offset + 3]);
}

// Sector AAD pins the index so records cannot be reordered.
std::vector<uint8_t> sector_aad(uint32_t index) {
    std::vector<uint8_t> aad(kMagic, kMagic + kMagicSize);
    put_u32be(aad, index);
    return aad;
}

std::string header_json(const SealedImage& image) {
    nlohmann::json j;
    j["version"] = image.version;
    j["serial"] = image.serial;
    j["sector_size"] = image.sector_size;
    j["sector_count"] = image.sector_count();
    return j.dump();
}

// Everything that precedes the image tag, in file order.
std::vector<uint8_t> body_bytes(const SealedImage& image) {
    std::vector<uint8_t> out(kMagic, kMagic + kMagicSize);
    const std::string header = header_json(image);
    put_u32be(out, static_cast<uint32_t>(header.size()));
    out.insert(out.end(), header.begin(), header.end());
    for (const SealedSector& sec : image.sectors) {
        out.insert(out.end(), sec.nonce.begin(), sec.nonce.end());
        put_u32be(out, static_cast<uint32_t>(sec.ciphertext.size()));
        out.insert(out.end(), sec.ciphertext.begin(), sec.ciphertext.end());
    }
    return out;
}

} // namespace

std::array<uint8_t, crypto::kAes256KeySize>
derive_content_key(const TagCode& code, const VisibleSerial& serial) {
    const std::string& s = serial.text();
    const auto key = crypto::hkdf_sha256(
        code.bytes(),
        std::span(reinterpret_cast<const uint8_t*>(s.data()), s.size()),
        std::span(reinterpret_cast<const uint8_t*>(kContentInfo), std::strlen(kContentInfo)),
        crypto::kAes256KeySize);
    std::array<uint8_t, crypto::kAes256KeySize> out{};
    std::copy(key.begin(), key.end(), out.begin());
    return out;
}

SealedImage seal_content(const std::vector<std::vector<uint8_t>>& sectors,
                         const TagCode& code, const VisibleSerial& serial,
                         Rng& rng, uint32_t sector_size) {
    if (sector_size == 0) {
        throw OversizeSector("sector_size must be > 0");
    }
    for (size_t i = 0; i < sectors.size(); ++i) {
        if (sectors[i].size() > sector_size) {
            throw OversizeSector("sector " + std::to_string(i) + " has " +
                                 std::to_string(sectors[i].size()) +
                                 " bytes, limit is " + std::to_string(sector_size));
        }
    }

    const auto key = derive_content_key(code, serial);
    SealedImage image;
    image.serial = serial.text();
    image.sector_size = sector_size;
    image.sectors.reserve(sectors.size());
    for (size_t i = 0; i < sectors.size(); ++i) {
        SealedSector sec;
        rng.fill_bytes(sec.nonce);
        sec.ciphertext = crypto::aes256gcm_seal(
            key, sec.nonce, sector_aad(static_cast<uint32_t>(i)), sectors[i]);
        image.sectors.push_back(std::move(sec));
    }
    image.image_tag = crypto::hmac_sha256(key, body_bytes(image));
    return image;
}

std::vector<std::vector<uint8_t>> open_content(const SealedImage& image,
                                               const TagCode& code,
                                               const VisibleSerial& serial) {
    if (image.version != SealedImage::kVersion) {
        throw HeaderCorrupt("unsupported image version " +
                            std::to_string(image.version));
    }
    const auto key = derive_content_key(code, serial);

    // Whole-image check first: wrong key, reordered/truncated/tampered
    // records and header edits all fail here, before any sector is touched.
    const auto expected_tag = crypto::hmac_sha256(key, body_bytes(image));
    if (!crypto::constant_time_equal(expected_tag, image.image_tag)) {
        throw ContentAuthFailure("image authentication failed");
    }

    std::vector<std::vector<uint8_t>> sectors;
    sectors.reserve(image.sectors.size());
    for (size_t i = 0; i < image.sectors.size(); ++i) {
        auto plain = crypto::aes256gcm_open(key, image.sectors[i].nonce,
                                            sector_aad(static_cast<uint32_t>(i)),
                                            image.sectors[i].ciphertext);
        if (!plain.has_value()) {
            throw ContentAuthFailure("sector " + std::to_string(i) +
                                     " authentication failed");
        }
        sectors.push_back(std::move(*plain));
    }
    return sectors;
}

std::vector<uint8_t> image_to_bytes(const SealedImage& image) {
    std::vector<uint8_t> out = body_bytes(image);
    out.insert(out.end(), image.image_tag.begin(), image.image_tag.end());
    return out;
}

SealedImage image_from_bytes(std::span<const uint8_t> bytes) {
    if (bytes.size() < kMagicSize + 4 + crypto::kSha256Size) {
        throw HeaderCorrupt("image file too short");
    }
    if (std::memcmp(bytes.data(), kMagic, kMagicSize) != 0) {
        throw HeaderCorrupt("bad image magic");
    }
    size_t pos = kMagicSize;
    const uint32_t header_len = get_u32be(bytes, pos);
    pos += 4;
    if (bytes.size() < pos + header_len + crypto::kSha256Size) {
        throw HeaderCorrupt("truncated image header");
    }
    const std::string header(reinterpret_cast<const char*>(bytes.data() + pos), header_len);
    pos += header_len;

    SealedImage image;
    uint32_t sector_count = 0;
    try {
        const auto j = nlohmann::json::parse(header);
        image.version = j.at("version").get<uint8_t>();
        image.serial = j.at("serial").get<std::string>();
        image.sector_size = j.at("sector_size").get<uint32_t>();
        sector_count = j.at("sector_count").get<uint32_t>();
    } catch (const nlohmann::json::exception& e) {
        throw HeaderCorrupt(std::string("bad image header: ") + e.what());
    }

    const size_t body_end = bytes.size() - crypto::kSha256Size;
    image.sectors.reserve(sector_count);
    for (uint32_t i = 0; i < sector_count; ++i) {
        if (pos + crypto::kGcmNonceSize + 4 > body_end) {
            throw HeaderCorrupt("truncated sector record " + std::to_string(i));
        }
        SealedSector sec;
        std::memcpy(sec.nonce.data(), bytes.data() + pos, crypto::kGcmNonceSize);
        pos += crypto::kGcmNonceSize;
        const uint32_t ct_len = get_u32be(bytes, pos);
        pos += 4;
        if (ct_len < crypto::kGcmTagSize || pos + ct_len > body_end) {
            throw HeaderCorrupt("bad sector record " + std::to_string(i));
        }
        sec.ciphertext.assign(bytes.begin() + pos, bytes.begin() + pos + ct_len);
        pos += ct_len;
        image.sectors.push_back(std::move(sec));
    }
    if (pos != body_end) {
        throw HeaderCorrupt("trailing bytes after sector records");
    }
    std::memcpy(image.image_tag.data(), bytes.data() + body_end, crypto::kSha256Size);
    return image;
}

void save_image(const SealedImage& image, const std::string& path) {
    const auto bytes = image_to_bytes(image);
    write_file_atomic(path, std::string(bytes.begin(), bytes.end()));
}

SealedImage load_image(const std::string& path) {
    const std::string data = read_file(path);
    return image_from_bytes(
        std::span(reinterpret_cast<const uint8_t*>(data.data()), data.size()));
}

} // namespace tagdrive
