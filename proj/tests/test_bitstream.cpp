#include <doctest.h>

#include <array>
#include <cstring>
#include <vector>

#include "bitstream.hpp"
#include "rng.hpp"

using namespace ecco;

TEST_CASE("write then read at the same position round trips") {
    std::array<uint8_t, 64> buf{};
    BitWriter w(buf.data(), 512);
    w.write(0b101, 3);
    BitReader r(buf.data(), 512);
    CHECK(r.read(3) == 0b101);
}

TEST_CASE("zero-width write leaves the cursor unchanged") {
    std::array<uint8_t, 64> buf{};
    BitWriter w(buf.data(), 512);
    w.write(0, 0);
    CHECK(w.position() == 0);
    w.write(0x5A, 8);
    CHECK(w.position() == 8);
}

TEST_CASE("interleaved writes reconstruct the direct byte image") {
    // Oracle: assemble the same 512-bit image byte by byte with plain shifts.
    std::array<uint8_t, 64> expected{};
    std::array<uint8_t, 64> buf{};
    BitWriter w(buf.data(), 512);
    Rng rng(3);
    size_t pos = 0;
    while (pos < 512) {
        const unsigned width = 1 + static_cast<unsigned>(rng.index(std::min<size_t>(17, 512 - pos)));
        const uint64_t value = rng.next_u64() & ((width == 64) ? ~0ull : ((1ull << width) - 1));
        w.write(value, width);
        for (unsigned i = 0; i < width; ++i) {
            const size_t b = pos + i;
            if ((value >> i) & 1) expected[b / 8] |= static_cast<uint8_t>(1u << (b % 8));
        }
        pos += width;
    }
    CHECK(std::memcmp(buf.data(), expected.data(), 64) == 0);
}

TEST_CASE("random write sequences read back identically") {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        std::array<uint8_t, 64> buf{};
        BitWriter w(buf.data(), 512);
        std::vector<std::pair<uint64_t, unsigned>> writes;
        size_t total = 0;
        while (true) {
            const unsigned width = static_cast<unsigned>(rng.index(33));
            if (total + width > 512) break;
            const uint64_t value =
                width == 0 ? 0 : rng.next_u64() & ((width == 64) ? ~0ull : ((1ull << width) - 1));
            w.write(value, width);
            writes.emplace_back(value, width);
            total += width;
            if (writes.size() > 100) break;
        }
        BitReader r(buf.data(), 512);
        for (const auto& [value, width] : writes) {
            CHECK(r.read(width) == value);
        }
    }
}

TEST_CASE("capacity overflow raises block overflow") {
    std::array<uint8_t, 64> buf{};
    BitWriter w(buf.data(), 512);
    w.seek(508);
    CHECK_THROWS_WITH_AS(w.write(0x1F, 5), "block overflow", Error);
    BitReader r(buf.data(), 512);
    r.seek(508);
    CHECK_THROWS_AS(r.read(5), Error);
}

TEST_CASE("value wider than the field is rejected") {
    std::array<uint8_t, 8> buf{};
    BitWriter w(buf.data(), 64);
    CHECK_THROWS_AS(w.write(0b100, 2), Error);
}

TEST_CASE("zero-extended reads past the capacity") {
    std::array<uint8_t, 64> buf{};
    buf[63] = 0xFF;
    CHECK(read_bits_zero_extended(buf.data(), 512, 504, 15) == 0xFF);
    CHECK(read_bits_zero_extended(buf.data(), 512, 511, 15) == 0x1);
}
