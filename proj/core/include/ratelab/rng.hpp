#pragma once

#include <array>
#include <cstdint>

namespace ratelab {

// Counter-based pseudo-random generator (Philox 4x32-10). A draw is a pure
// function of (key, slot, step), so independent slots can be generated in any
// order, on any number of threads, with identical results. Slot i of a run is
// also a valid prefix of any longer run with the same key.
struct Philox4x32 {
    static constexpr uint32_t kMul0 = 0xD2511F53u;
    static constexpr uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr uint32_t kWeyl1 = 0xBB67AE85u;

    // 10-round block function: 64-bit key, 128-bit counter -> 128 random bits.
    static std::array<uint32_t, 4> block(uint64_t key, uint64_t ctr_hi, uint64_t ctr_lo) noexcept {
        uint32_t c0 = static_cast<uint32_t>(ctr_lo);
        uint32_t c1 = static_cast<uint32_t>(ctr_lo >> 32);
        uint32_t c2 = static_cast<uint32_t>(ctr_hi);
        uint32_t c3 = static_cast<uint32_t>(ctr_hi >> 32);
        uint32_t k0 = static_cast<uint32_t>(key);
        uint32_t k1 = static_cast<uint32_t>(key >> 32);
        for (int round = 0; round < 10; ++round) {
            const uint64_t p0 = static_cast<uint64_t>(kMul0) * c0;
            const uint64_t p1 = static_cast<uint64_t>(kMul1) * c2;
            const uint32_t hi0 = static_cast<uint32_t>(p0 >> 32), lo0 = static_cast<uint32_t>(p0);
            const uint32_t hi1 = static_cast<uint32_t>(p1 >> 32), lo1 = static_cast<uint32_t>(p1);
            c0 = hi1 ^ c1 ^ k0;
            c1 = lo1;
            c2 = hi0 ^ c3 ^ k1;
            c3 = lo0;
            k0 += kWeyl0;
            k1 += kWeyl1;
        }
        return {c0, c1, c2, c3};
    }
};

// Stable 64-bit combine used to derive independent keys, e.g. per-trial seeds
// h(base_seed, n, trial). SplitMix64 finalizer on top of a Weyl step.
inline uint64_t mix_seed(uint64_t a, uint64_t b) noexcept {
    uint64_t z = a + 0x9E3779B97F4A7C15ull * (b + 0x632BE59BD9B4E019ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// A deterministic variate stream bound to (key, slot). Values come from
// Philox blocks with counter (slot, step); the step advances as the stream
// is consumed, so a slot may hold any number of variates without touching
// its neighbours.
class Draw {
public:
    Draw(uint64_t key, uint64_t slot) noexcept : key_(key), slot_(slot) {}

    uint64_t u64() noexcept {
        if (have_ == 0) {
            const auto b = Philox4x32::block(key_, slot_, step_++);
            buf_[0] = (static_cast<uint64_t>(b[1]) << 32) | b[0];
            buf_[1] = (static_cast<uint64_t>(b[3]) << 32) | b[2];
            have_ = 2;
        }
        return buf_[--have_];
    }

    // Uniform on [0, 1), 53-bit resolution.
    double u01() noexcept { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1]; safe under log() and negative powers.
    double u01_open_below() noexcept {
        return static_cast<double>((u64() >> 11) + 1) * 0x1.0p-53;
    }

    // Uniform on (0, 1), symmetric about 1/2; safe in quantile functions.
    double u01_open() noexcept {
        return (static_cast<double>(u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Unbiased integer in [0, bound) via bitmask rejection.
    uint64_t below(uint64_t bound) noexcept {
        if (bound <= 1) return 0;
        uint64_t mask = bound - 1;
        mask |= mask >> 1; mask |= mask >> 2; mask |= mask >> 4;
        mask |= mask >> 8; mask |= mask >> 16; mask |= mask >> 32;
        for (;;) {
            const uint64_t v = u64() & mask;
            if (v < bound) return v;
        }
    }

private:
    uint64_t key_;
    uint64_t slot_;
    uint64_t step_ = 0;
    uint64_t buf_[2] = {0, 0};
    int have_ = 0;
};

}  // namespace ratelab
