#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace tagdrive {

// Seeded RNG for every randomized piece of the simulator. std::mt19937_64 is
// fully specified by the standard, so a seed pins the byte stream on every
// platform; the value mappings below are pinned here instead of using the
// implementation-defined <random> distributions.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    // Uniform double in [0, 1), 53 significant bits.
    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n). n must be > 0.
    uint64_t below(uint64_t n) {
        // Rejection sampling keeps it exactly uniform and still deterministic.
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t v;
        do {
            v = engine_();
        } while (v >= limit);
        return v % n;
    }

    bool chance(double p) { return unit() < p; }

    void fill_bytes(std::span<uint8_t> out) {
        size_t i = 0;
        while (i < out.size()) {
            uint64_t v = engine_();
            for (int b = 0; b < 8 && i < out.size(); ++b, ++i) {
                out[i] = static_cast<uint8_t>(v >> (8 * b));
            }
        }
    }

private:
    std::mt19937_64 engine_;
};

} // namespace tagdrive
