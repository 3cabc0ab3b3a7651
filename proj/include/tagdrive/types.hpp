#pragma once

// Core domain types shared by the whole toolchain: tag codes, serials,
// discs, the authorized-code database and drive configuration.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "tagdrive/errors.hpp"
#include "tagdrive/rng.hpp"

namespace tagdrive {

class Rng;
struct SealedImage;

// The hidden second serial stored in the RFID tag: a fixed-width bit string.
// Width is a deployment parameter (default 96); the 4-bit demo deployments
// use width 4. Bit 0 is the most significant (leftmost in text form); bits
// live in a byte vector padded with zero bits at the low end of the last
// byte when the width is not a multiple of 8.
class TagCode {
public:
    static constexpr unsigned kDefaultWidth = 96;
    static constexpr unsigned kMaxWidth = 4096;

    // Parses canonical text: lowercase hex for widths divisible by 8,
    // otherwise "0b"-prefixed bit string. Hex case-insensitive on input,
    // "0b" form accepted for any width. Throws MalformedText / WidthMismatch.
    static TagCode parse(const std::string& text, unsigned width);

    static TagCode from_bytes(std::span<const uint8_t> bytes, unsigned width);
    static TagCode random(unsigned width, Rng& rng);

    // Canonical text form; parse(format(c), width) == c.
    std::string format() const;

    unsigned width() const { return width_; }
    const std::vector<uint8_t>& bytes() const { return bytes_; }

    bool bit(unsigned index) const;
    TagCode with_bit_flipped(unsigned index) const;

    // Comparing codes of different widths is a deployment error, never
    // "false"; throws WidthMismatch.
    bool operator==(const TagCode& other) const;
    bool operator!=(const TagCode& other) const { return !(*this == other); }

private:
    TagCode(unsigned width, std::vector<uint8_t> bytes)
        : width_(width), bytes_(std::move(bytes)) {}

    unsigned width_ = 0;
    std::vector<uint8_t> bytes_;
};

// Raw ordering over (width, bytes) for use as a container key. Unlike
// operator== this never throws; containers may legitimately hold codes of
// several widths (e.g. while validating foreign files).
struct TagCodeRawLess {
    bool operator()(const TagCode& a, const TagCode& b) const {
        if (a.width() != b.width()) return a.width() < b.width();
        return a.bytes() < b.bytes();
    }
};

inline size_t code_byte_count(unsigned width) { return (width + 7) / 8; }

// The first, user-visible serial printed on the disc. 4-64 chars, [A-Z0-9-].
class VisibleSerial {
public:
    static VisibleSerial parse(const std::string& text); // throws MalformedText

    const std::string& text() const { return text_; }

    bool operator==(const VisibleSerial& o) const { return text_ == o.text_; }
    bool operator<(const VisibleSerial& o) const { return text_ < o.text_; }

private:
    explicit VisibleSerial(std::string text) : text_(std::move(text)) {}
    std::string text_;
};

enum class FrequencyBand {
    LF_125kHz,
    HF_13_56MHz,
    UHF_860_960MHz,
    MW_2_4GHz,
};

const char* band_name(FrequencyBand band);
FrequencyBand band_from_name(const std::string& name); // throws MalformedText

// Passive, read-only tag. `damaged` forces read failure in simulation.
struct RfidTag {
    TagCode code;
    FrequencyBand band = FrequencyBand::HF_13_56MHz;
    bool damaged = false;
};

struct Disc {
    VisibleSerial serial;
    std::optional<RfidTag> tag;                   // absent models ordinary (pirated) media
    std::shared_ptr<const SealedImage> content;   // optional sealed payload
    std::string title;
};

enum class ActivationSource {
    LocalProvision,
    RemoteActivation,
};

const char* activation_source_name(ActivationSource src);
ActivationSource activation_source_from_name(const std::string& name);

struct ActivationRecord {
    VisibleSerial serial;
    int64_t activated_at = 0; // UTC seconds
    ActivationSource source = ActivationSource::LocalProvision;

    bool operator==(const ActivationRecord&) const = default;
};

// The host computer's set of authorized tag codes. Set semantics: membership
// is independent of insertion order; re-inserting a code keeps the earliest
// record. Single writer, any number of readers after construction.
class CodeDatabase {
public:
    explicit CodeDatabase(unsigned width);

    unsigned width() const { return width_; }
    size_t size() const { return entries_.size(); }

    // Idempotent; throws WidthMismatch if the code width differs.
    void insert(const TagCode& code, const ActivationRecord& record);

    // Exact set membership; throws WidthMismatch on width difference.
    bool contains(const TagCode& code) const;

    const std::map<TagCode, ActivationRecord, TagCodeRawLess>& entries() const {
        return entries_;
    }

    int64_t latest_activation() const;

    bool operator==(const CodeDatabase& other) const;

private:
    unsigned width_;
    std::map<TagCode, ActivationRecord, TagCodeRawLess> entries_;
};

struct DriveConfig {
    int64_t spin_up_ms = 240;                     // simulated spin-up delay
    unsigned read_retries = 2;                    // extra attempts after the first
    std::set<FrequencyBand> reader_bands = {FrequencyBand::HF_13_56MHz};
    double bit_error_rate = 0.0;                  // per-bit flip probability
};

void validate_config(const DriveConfig& cfg); // throws ScenarioMalformed

} // namespace tagdrive
