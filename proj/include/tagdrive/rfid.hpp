#pragma once

// Simulated reader-tag air interface. Pure channel model: band matching,
// forced damage, independent per-bit flips. Retry policy lives in the drive
// controller, not here.

#include <cstdint>
#include <optional>
#include <set>

#include "tagdrive/rng.hpp"
#include "tagdrive/types.hpp"

namespace tagdrive {

struct ReadResult {
    enum class Kind { Ok, NoTagDetected, ReadCorrupt };

    Kind kind = Kind::NoTagDetected;
    std::optional<TagCode> code; // set iff kind == Ok

    static ReadResult ok(TagCode c) { return {Kind::Ok, std::move(c)}; }
    static ReadResult no_tag() { return {Kind::NoTagDetected, std::nullopt}; }
    static ReadResult corrupt() { return {Kind::ReadCorrupt, std::nullopt}; }

    bool is_ok() const { return kind == Kind::Ok; }
};

// Noise model shared by consecutive reads; same seed + same inputs gives the
// identical result sequence. A corrupted read surfaces as ReadCorrupt with
// probability detect_probability, otherwise as Ok carrying the wrong code --
// the authenticator, not the channel, is the security boundary.
class ReadChannel {
public:
    static constexpr double kDefaultDetectProbability = 0.9;

    ReadChannel(uint64_t seed, double bit_error_rate,
                double detect_probability = kDefaultDetectProbability)
        : rng_(seed),
          bit_error_rate_(bit_error_rate),
          detect_probability_(detect_probability) {}

    double bit_error_rate() const { return bit_error_rate_; }
    double detect_probability() const { return detect_probability_; }
    Rng& rng() { return rng_; }

private:
    Rng rng_;
    double bit_error_rate_;
    double detect_probability_;
};

// True iff the tag's band is one the reader can drive.
bool band_compatible(const std::set<FrequencyBand>& reader_bands,
                     FrequencyBand tag_band);

// One read attempt. NoTagDetected when the disc is untagged, the tag is
// damaged, or the band does not match; otherwise the code passes through the
// noise model. bit_error_rate == 0 always yields the exact code.
ReadResult read_tag(const Disc& disc, const DriveConfig& cfg, ReadChannel& chan);

} // namespace tagdrive
