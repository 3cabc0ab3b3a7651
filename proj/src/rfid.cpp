#include "tagdrive/rfid.hpp"

namespace tagdrive {

bool band_compatible(const std::set<FrequencyBand>& reader_bands,
                     FrequencyBand tag_band) {
    return reader_bands.count(tag_band) != 0;
}

ReadResult read_tag(const Disc& disc, const DriveConfig& cfg, ReadChannel& chan) {
    if (!disc.tag.has_value()) return ReadResult::no_tag();
    const RfidTag& tag = *disc.tag;
    if (tag.damaged) return ReadResult::no_tag();
    if (!band_compatible(cfg.reader_bands, tag.band)) return ReadResult::no_tag();

    if (chan.bit_error_rate() <= 0.0) {
        return ReadResult::ok(tag.code);
    }

    // One draw per bit, in bit order; the draw order is part of the
    // determinism contract.
    TagCode code = tag.code;
    bool flipped = false;
    for (unsigned i = 0; i < code.width(); ++i) {
        if (chan.rng().unit() < chan.bit_error_rate()) {
            code = code.with_bit_flipped(i);
            flipped = true;
        }
    }
    if (!flipped) return ReadResult::ok(code);
    if (chan.rng().unit() < chan.detect_probability()) return ReadResult::corrupt();
    return ReadResult::ok(code); // undetected corruption: wrong code slips through
}

} // namespace tagdrive
