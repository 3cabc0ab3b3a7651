#include "tagdrive/types.hpp"

#include <algorithm>
#include <cctype>

#include "tagdrive/rng.hpp"

namespace tagdrive {

namespace {

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

void check_width(unsigned width) {
    if (width == 0 || width > TagCode::kMaxWidth) {
        throw WidthMismatch("code width must be in [1, " +
                            std::to_string(TagCode::kMaxWidth) + "], got " +
                            std::to_string(width));
    }
}

// Low bits of the final byte beyond `width` must stay zero.
void clear_pad_bits(std::vector<uint8_t>& bytes, unsigned width) {
    const unsigned rem = width % 8;
    if (rem != 0 && !bytes.empty()) {
        bytes.back() &= static_cast<uint8_t>(0xff << (8 - rem));
    }
}

} // namespace

TagCode TagCode::parse(const std::string& text, unsigned width) {
    check_width(width);
    const bool byte_width = width % 8 == 0;
    // The "0b" prefix marks a bit string, except when the text has exactly
    // the hex length for a byte-aligned width (hex like "0b" or "0b11" is
    // hex, never a truncated bit string; the forms cannot collide because a
    // bit string is always 2 + width characters, a hex string width/4).
    const bool bit_form = text.size() >= 2 && text[0] == '0' && text[1] == 'b' &&
                          !(byte_width && text.size() == width / 4);
    if (bit_form) {
        const std::string bits = text.substr(2);
        for (char c : bits) {
            if (c != '0' && c != '1') {
                throw MalformedText("bit string contains '" + std::string(1, c) + "'");
            }
        }
        if (bits.size() != width) {
            throw WidthMismatch("bit string has " + std::to_string(bits.size()) +
                                " bits, deployment width is " + std::to_string(width));
        }
        std::vector<uint8_t> bytes(code_byte_count(width), 0);
        for (unsigned i = 0; i < width; ++i) {
            if (bits[i] == '1') bytes[i / 8] |= static_cast<uint8_t>(0x80 >> (i % 8));
        }
        return TagCode(width, std::move(bytes));
    }

    if (!byte_width) {
        throw MalformedText("width " + std::to_string(width) +
                            " is not byte-aligned; use the 0b bit-string form");
    }
    if (text.empty()) throw MalformedText("empty code text");
    std::vector<uint8_t> bytes(width / 8, 0);
    for (size_t i = 0; i < text.size(); ++i) {
        const int v = hex_value(text[i]);
        if (v < 0) throw MalformedText("invalid hex digit '" + std::string(1, text[i]) + "'");
        if (i < width / 4) {
            if (i % 2 == 0) {
                bytes[i / 2] = static_cast<uint8_t>(v << 4);
            } else {
                bytes[i / 2] |= static_cast<uint8_t>(v);
            }
        }
    }
    if (text.size() != width / 4) {
        throw WidthMismatch("hex string has " + std::to_string(text.size() * 4) +
                            " bits, deployment width is " + std::to_string(width));
    }
    return TagCode(width, std::move(bytes));
}

TagCode TagCode::from_bytes(std::span<const uint8_t> bytes, unsigned width) {
    check_width(width);
    if (bytes.size() != code_byte_count(width)) {
        throw WidthMismatch("expected " + std::to_string(code_byte_count(width)) +
                            " bytes for width " + std::to_string(width) + ", got " +
                            std::to_string(bytes.size()));
    }
    std::vector<uint8_t> copy(bytes.begin(), bytes.end());
    const unsigned rem = width % 8;
    if (rem != 0 && (copy.back() & static_cast<uint8_t>(0xff >> rem)) != 0) {
        throw MalformedText("nonzero padding bits below the code width");
    }
    return TagCode(width, std::move(copy));
}

TagCode TagCode::random(unsigned width, Rng& rng) {
    check_width(width);
    std::vector<uint8_t> bytes(code_byte_count(width), 0);
    rng.fill_bytes(bytes);
    clear_pad_bits(bytes, width);
    return TagCode(width, std::move(bytes));
}

std::string TagCode::format() const {
    if (width_ % 8 == 0) {
        static const char* digits = "0123456789abcdef";
        std::string out;
        out.reserve(bytes_.size() * 2);
        for (uint8_t b : bytes_) {
            out.push_back(digits[b >> 4]);
            out.push_back(digits[b & 0x0f]);
        }
        return out;
    }
    std::string out = "0b";
    out.reserve(2 + width_);
    for (unsigned i = 0; i < width_; ++i) {
        out.push_back(bit(i) ? '1' : '0');
    }
    return out;
}

bool TagCode::bit(unsigned index) const {
    if (index >= width_) {
        throw WidthMismatch("bit index " + std::to_string(index) +
                            " out of range for width " + std::to_string(width_));
    }
    return (bytes_[index / 8] & (0x80 >> (index % 8))) != 0;
}

TagCode TagCode::with_bit_flipped(unsigned index) const {
    if (index >= width_) {
        throw WidthMismatch("bit index " + std::to_string(index) +
                            " out of range for width " + std::to_string(width_));
    }
    std::vector<uint8_t> copy = bytes_;
    copy[index / 8] ^= static_cast<uint8_t>(0x80 >> (index % 8));
    return TagCode(width_, std::move(copy));
}

bool TagCode::operator==(const TagCode& other) const {
    if (width_ != other.width_) {
        throw WidthMismatch("comparing codes of widths " + std::to_string(width_) +
                            " and " + std::to_string(other.width_));
    }
    return bytes_ == other.bytes_;
}

VisibleSerial VisibleSerial::parse(const std::string& text) {
    if (text.size() < 4 || text.size() > 64) {
        throw MalformedText("serial length must be 4-64, got " +
                            std::to_string(text.size()));
    }
    for (char c : text) {
        const bool ok = (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-';
        if (!ok) {
            throw MalformedText("serial contains '" + std::string(1, c) +
                                "'; allowed charset is [A-Z0-9-]");
        }
    }
    return VisibleSerial(text);
}

const char* band_name(FrequencyBand band) {
    switch (band) {
        case FrequencyBand::LF_125kHz: return "LF_125kHz";
        case FrequencyBand::HF_13_56MHz: return "HF_13_56MHz";
        case FrequencyBand::UHF_860_960MHz: return "UHF_860_960MHz";
        case FrequencyBand::MW_2_4GHz: return "MW_2_4GHz";
    }
    throw MalformedText("invalid FrequencyBand value");
}

FrequencyBand band_from_name(const std::string& name) {
    if (name == "LF_125kHz") return FrequencyBand::LF_125kHz;
    if (name == "HF_13_56MHz") return FrequencyBand::HF_13_56MHz;
    if (name == "UHF_860_960MHz") return FrequencyBand::UHF_860_960MHz;
    if (name == "MW_2_4GHz") return FrequencyBand::MW_2_4GHz;
    throw MalformedText("unknown frequency band '" + name + "'");
}

const char* activation_source_name(ActivationSource src) {
    switch (src) {
        case ActivationSource::LocalProvision: return "LocalProvision";
        case ActivationSource::RemoteActivation: return "RemoteActivation";
    }
    throw MalformedText("invalid ActivationSource value");
}

ActivationSource activation_source_from_name(const std::string& name) {
    if (name == "LocalProvision") return ActivationSource::LocalProvision;
    if (name == "RemoteActivation") return ActivationSource::RemoteActivation;
    throw MalformedText("unknown activation source '" + name + "'");
}

CodeDatabase::CodeDatabase(unsigned width) : width_(width) {
    if (width == 0 || width > TagCode::kMaxWidth) {
        throw WidthMismatch("database width must be in [1, " +
                            std::to_string(TagCode::kMaxWidth) + "]");
    }
}

void CodeDatabase::insert(const TagCode& code, const ActivationRecord& record) {
    if (code.width() != width_) {
        throw WidthMismatch("inserting width-" + std::to_string(code.width()) +
                            " code into width-" + std::to_string(width_) + " database");
    }
    // Re-insert keeps the earliest record: re-activation must not rewrite history.
    entries_.emplace(code, record);
}

bool CodeDatabase::contains(const TagCode& code) const {
    if (code.width() != width_) {
        throw WidthMismatch("probing width-" + std::to_string(code.width()) +
                            " code against width-" + std::to_string(width_) + " database");
    }
    return entries_.find(code) != entries_.end();
}

int64_t CodeDatabase::latest_activation() const {
    int64_t latest = 0;
    for (const auto& [code, rec] : entries_) {
        latest = std::max(latest, rec.activated_at);
    }
    return latest;
}

bool CodeDatabase::operator==(const CodeDatabase& other) const {
    if (width_ != other.width_ || entries_.size() != other.entries_.size()) return false;
    auto it = other.entries_.begin();
    for (const auto& [code, rec] : entries_) {
        if (code.bytes() != it->first.bytes() || !(rec == it->second)) return false;
        ++it;
    }
    return true;
}

void validate_config(const DriveConfig& cfg) {
    if (cfg.spin_up_ms < 0) {
        throw ScenarioMalformed("spin_up_ms must be >= 0");
    }
    if (cfg.reader_bands.empty()) {
        throw ScenarioMalformed("reader_bands must be non-empty");
    }
    if (cfg.bit_error_rate < 0.0 || cfg.bit_error_rate > 1.0) {
        throw ScenarioMalformed("bit_error_rate must be in [0, 1]");
    }
}

} // namespace tagdrive
