#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <thread>
#include <vector>

#include "ratelab/rng.hpp"

using namespace ratelab;

TEST_CASE("philox4x32-10 known-answer vectors") {
    // Reference vectors from the Random123 test suite (counter words are
    // little-endian within our (hi, lo) packing).
    {
        const auto b = Philox4x32::block(0, 0, 0);
        CHECK(b[0] == 0x6627e8d5u);
        CHECK(b[1] == 0xe169c58du);
        CHECK(b[2] == 0xbc57ac4cu);
        CHECK(b[3] == 0x9b00dbd8u);
    }
    {
        const auto b = Philox4x32::block(~uint64_t{0}, ~uint64_t{0}, ~uint64_t{0});
        CHECK(b[0] == 0x408f276du);
        CHECK(b[1] == 0x41c83b0eu);
        CHECK(b[2] == 0xa20bc7c6u);
        CHECK(b[3] == 0x6d5451fdu);
    }
    {
        // counter {243f6a88, 85a308d3, 13198a2e, 03707344}, key {a4093822, 299f31d0}
        const uint64_t lo = (uint64_t{0x85a308d3u} << 32) | 0x243f6a88u;
        const uint64_t hi = (uint64_t{0x03707344u} << 32) | 0x13198a2eu;
        const uint64_t key = (uint64_t{0x299f31d0u} << 32) | 0xa4093822u;
        const auto b = Philox4x32::block(key, hi, lo);
        CHECK(b[0] == 0xd16cfe09u);
        CHECK(b[1] == 0x94fdccebu);
        CHECK(b[2] == 0x5001e420u);
        CHECK(b[3] == 0x24126ea1u);
    }
}

TEST_CASE("draws are pure functions of (key, slot)") {
    Draw a(42, 7), b(42, 7);
    for (int i = 0; i < 100; ++i) CHECK(a.u64() == b.u64());

    Draw c(42, 8);
    Draw d(42, 7);
    CHECK(c.u64() != d.u64());
    Draw e(43, 7);
    Draw f(42, 7);
    CHECK(e.u64() != f.u64());
}

TEST_CASE("slots generated out of order or on threads agree") {
    constexpr int kSlots = 64;
    std::vector<uint64_t> forward(kSlots), backward(kSlots), threaded(kSlots);
    for (int i = 0; i < kSlots; ++i) forward[i] = Draw(9, i).u64();
    for (int i = kSlots - 1; i >= 0; --i) backward[i] = Draw(9, i).u64();

    std::vector<std::thread> pool;
    for (int t = 0; t < 4; ++t)
        pool.emplace_back([&, t] {
            for (int i = t; i < kSlots; i += 4) threaded[i] = Draw(9, i).u64();
        });
    for (auto& t : pool) t.join();

    CHECK(forward == backward);
    CHECK(forward == threaded);
}

TEST_CASE("u01 ranges") {
    Draw d(1, 0);
    for (int i = 0; i < 10000; ++i) {
        const double u = d.u01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    Draw e(1, 1);
    for (int i = 0; i < 10000; ++i) {
        const double u = e.u01_open();
        CHECK(u > 0.0);
        CHECK(u < 1.0);
    }
    Draw f(1, 2);
    for (int i = 0; i < 10000; ++i) {
        const double u = f.u01_open_below();
        CHECK(u > 0.0);
        CHECK(u <= 1.0);
    }
}

TEST_CASE("below is in range and hits all residues") {
    Draw d(5, 0);
    std::set<uint64_t> seen;
    for (int i = 0; i < 1000; ++i) {
        const uint64_t v = d.below(7);
        CHECK(v < 7);
        seen.insert(v);
    }
    CHECK(seen.size() == 7);
}

TEST_CASE("mix_seed separates nearby keys") {
    std::set<uint64_t> seen;
    for (uint64_t a = 0; a < 50; ++a)
        for (uint64_t b = 0; b < 50; ++b) seen.insert(mix_seed(a, b));
    CHECK(seen.size() == 2500);
}
