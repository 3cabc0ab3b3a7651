#include <doctest.h>

#include <cmath>

#include "tagdrive/rfid.hpp"

using namespace tagdrive;

namespace {

Disc tagged_disc(const std::string& code_text, unsigned width,
                 FrequencyBand band = FrequencyBand::HF_13_56MHz,
                 bool damaged = false) {
    return Disc{VisibleSerial::parse("DISC-0001"),
                RfidTag{TagCode::parse(code_text, width), band, damaged},
                nullptr,
                "test disc"};
}

Disc untagged_disc() {
    return Disc{VisibleSerial::parse("DISC-0002"), std::nullopt, nullptr, "no tag"};
}

} // namespace

TEST_CASE("band compatibility follows the reader's band set") {
    const std::set<FrequencyBand> hf_only = {FrequencyBand::HF_13_56MHz};
    const std::set<FrequencyBand> lf_only = {FrequencyBand::LF_125kHz};
    const std::set<FrequencyBand> multimode = {
        FrequencyBand::LF_125kHz, FrequencyBand::HF_13_56MHz,
        FrequencyBand::UHF_860_960MHz, FrequencyBand::MW_2_4GHz};

    CHECK(band_compatible(hf_only, FrequencyBand::HF_13_56MHz));
    CHECK_FALSE(band_compatible(lf_only, FrequencyBand::UHF_860_960MHz));
    for (FrequencyBand b : multimode) {
        CHECK(band_compatible(multimode, b));
    }
}

TEST_CASE("noiseless read returns the exact code") {
    const Disc disc = tagged_disc("0b1010", 4);
    DriveConfig cfg;
    ReadChannel chan(1, 0.0);
    const ReadResult r = read_tag(disc, cfg, chan);
    REQUIRE(r.is_ok());
    CHECK(*r.code == disc.tag->code);
}

TEST_CASE("untagged disc reads as NoTagDetected") {
    DriveConfig cfg;
    ReadChannel chan(1, 0.0);
    CHECK(read_tag(untagged_disc(), cfg, chan).kind ==
          ReadResult::Kind::NoTagDetected);
}

TEST_CASE("damaged tag reads as NoTagDetected") {
    const Disc disc = tagged_disc("0b1010", 4, FrequencyBand::HF_13_56MHz, true);
    DriveConfig cfg;
    ReadChannel chan(1, 0.0);
    CHECK(read_tag(disc, cfg, chan).kind == ReadResult::Kind::NoTagDetected);
}

TEST_CASE("incompatible band reads as NoTagDetected for every seed") {
    const Disc disc = tagged_disc("0b1010", 4, FrequencyBand::UHF_860_960MHz);
    DriveConfig cfg; // HF-only reader
    for (uint64_t seed = 0; seed < 64; ++seed) {
        ReadChannel chan(seed, 0.5);
        CHECK(read_tag(disc, cfg, chan).kind == ReadResult::Kind::NoTagDetected);
    }
}

TEST_CASE("ber=1 with certain detection is always ReadCorrupt") {
    const Disc disc = tagged_disc("0b1010", 4);
    DriveConfig cfg;
    cfg.bit_error_rate = 1.0;
    for (uint64_t seed = 0; seed < 32; ++seed) {
        ReadChannel chan(seed, 1.0, 1.0);
        CHECK(read_tag(disc, cfg, chan).kind == ReadResult::Kind::ReadCorrupt);
    }
}

TEST_CASE("same seed and inputs give the same result sequence") {
    const Disc disc = tagged_disc("deadbeefcafef00d01020304", 96);
    DriveConfig cfg;
    cfg.bit_error_rate = 0.05;
    for (int round = 0; round < 4; ++round) {
        ReadChannel a(99, 0.05);
        ReadChannel b(99, 0.05);
        for (int i = 0; i < 200; ++i) {
            const ReadResult ra = read_tag(disc, cfg, a);
            const ReadResult rb = read_tag(disc, cfg, b);
            CHECK(ra.kind == rb.kind);
            if (ra.is_ok()) CHECK(*ra.code == *rb.code);
        }
    }
}

TEST_CASE("noiseless soundness: ber=0 never yields a wrong code") {
    Rng gen(5150);
    DriveConfig cfg;
    for (int i = 0; i < 2000; ++i) {
        const TagCode code = TagCode::random(96, gen);
        const Disc disc{VisibleSerial::parse("DISC-9999"),
                        RfidTag{code, FrequencyBand::HF_13_56MHz, false}, nullptr, ""};
        ReadChannel chan(gen.next_u64(), 0.0);
        const ReadResult r = read_tag(disc, cfg, chan);
        REQUIRE(r.is_ok());
        CHECK(*r.code == code);
    }
}

TEST_CASE("corrupted-read fraction tracks the binomial model at ber=0.01") {
    // Oracle: P(any of 96 bits flips) = 1 - (1-ber)^96, computed independently
    // of the channel implementation.
    const double ber = 0.01;
    const int n = 100000;
    const double p = 1.0 - std::pow(1.0 - ber, 96);
    const double sigma = std::sqrt(p * (1.0 - p) / n);

    const Disc disc = tagged_disc("deadbeefcafef00d01020304", 96);
    DriveConfig cfg;
    cfg.bit_error_rate = ber;
    ReadChannel chan(424242, ber);

    int corrupted = 0;
    for (int i = 0; i < n; ++i) {
        const ReadResult r = read_tag(disc, cfg, chan);
        if (r.kind == ReadResult::Kind::ReadCorrupt) {
            ++corrupted;
        } else if (r.is_ok() && !(*r.code == disc.tag->code)) {
            ++corrupted; // undetected corruption still counts as a corrupted read
        }
    }
    const double fraction = static_cast<double>(corrupted) / n;
    CHECK(std::abs(fraction - p) <= 3.0 * sigma);
}

TEST_CASE("undetected corruption rate follows detect_probability") {
    // With ber high enough that every read corrupts, Ok results should appear
    // at roughly (1 - p_detect) of reads.
    const Disc disc = tagged_disc("deadbeefcafef00d01020304", 96);
    DriveConfig cfg;
    cfg.bit_error_rate = 1.0;
    ReadChannel chan(777, 1.0, 0.9);
    int undetected = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        if (read_tag(disc, cfg, chan).is_ok()) ++undetected;
    }
    const double fraction = static_cast<double>(undetected) / n;
    const double sigma = std::sqrt(0.1 * 0.9 / n);
    CHECK(std::abs(fraction - 0.1) <= 4.0 * sigma);
}
