#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "codec2x.hpp"
#include "fp16.hpp"
#include "rng.hpp"

using namespace ecco;

namespace {

std::array<double, kGroupSize2x> snapped(const std::array<double, kGroupSize2x>& raw) {
    std::array<double, kGroupSize2x> out{};
    for (size_t i = 0; i < raw.size(); ++i) out[i] = fp16_to_double(double_to_fp16(raw[i]));
    return out;
}

} // namespace

TEST_CASE("uniform range quantization hits the rails") {
    std::array<double, kGroupSize2x> vals{};
    for (size_t i = 0; i < kGroupSize2x; ++i) {
        vals[i] = -1.0 + 2.0 * static_cast<double>(i) / 63.0;
    }
    vals[0] = -1.0;
    vals[63] = 1.0;
    const Quantized2x q = quantize_group64(snapped(vals));
    CHECK(fp16_to_double(q.zero_bits) == 0.0);
    CHECK(fp16_to_double(q.scale_bits) == doctest::Approx(2.0 / 126.0).epsilon(1e-3));
    CHECK(q.q[63] == 63);
    CHECK(q.q[0] == -63);
}

TEST_CASE("constant group reconstructs exactly") {
    std::array<double, kGroupSize2x> vals{};
    vals.fill(fp16_to_double(double_to_fp16(0.371)));
    const Quantized2x q = quantize_group64(vals);
    CHECK(fp16_to_double(q.zero_bits) == vals[0]);
    for (int8_t v : q.q) CHECK(v == 0);
    const Unpacked2x u = unpack_block2x(pack_block2x(q));
    for (size_t i = 0; i < kGroupSize2x; ++i) {
        CHECK(fp16_to_double(u.values[i]) == vals[i]);
    }
}

TEST_CASE("container round trip is lossless") {
    Rng rng(1);
    for (int trial = 0; trial < 500; ++trial) {
        Quantized2x q;
        q.scale_bits = static_cast<uint16_t>(rng.next_u64());
        q.zero_bits = static_cast<uint16_t>(rng.next_u64());
        for (int8_t& v : q.q) {
            v = static_cast<int8_t>(static_cast<int>(rng.index(127)) - 63);
        }
        const Block block = pack_block2x(q);
        const Unpacked2x u = unpack_block2x(block);
        CHECK(u.raw.scale_bits == q.scale_bits);
        CHECK(u.raw.zero_bits == q.zero_bits);
        CHECK(u.raw.q == q.q);
        CHECK(!u.reserved_bits_set);
    }
}

TEST_CASE("negative one packs as 0b1111111 and sign-extends back") {
    Quantized2x q;
    q.scale_bits = double_to_fp16(1.0);
    q.zero_bits = 0;
    q.q.fill(0);
    q.q[5] = -1;
    const Block block = pack_block2x(q);
    CHECK((block[5] & 0x7F) == 0x7F);
    const Unpacked2x u = unpack_block2x(block);
    CHECK(u.raw.q[5] == -1);
    CHECK(fp16_to_double(u.values[5]) == -1.0);
}

TEST_CASE("all-zero block decodes to zeros with zero scale and zero point") {
    Block block{};
    const Unpacked2x u = unpack_block2x(block);
    CHECK(u.raw.scale_bits == 0);
    CHECK(u.raw.zero_bits == 0);
    for (uint16_t v : u.values) CHECK((v & 0x7FFF) == 0);
    CHECK(!u.reserved_bits_set);
}

TEST_CASE("reserved metadata bits only warn") {
    Block block{};
    block[40] = 0x80; // reserved metadata bit set, q = 0
    const Unpacked2x u = unpack_block2x(block);
    CHECK(u.reserved_bits_set);
}

TEST_CASE("fixed ratio: 64 values to 64 bytes") {
    std::array<double, kGroupSize2x> vals{};
    const Block block = pack_block2x(quantize_group64(vals));
    CHECK(block.size() == 64);
    CHECK(kGroupSize2x * 16 / (block.size() * 8) == 2); // 1024 / 512
}

TEST_CASE("reconstruction error stays within the analytic bound") {
    Rng rng(7);
    for (int trial = 0; trial < 2000; ++trial) {
        std::array<double, kGroupSize2x> vals{};
        const double sigma = std::exp(rng.uniform(-6.0, 3.0));
        const double shift = rng.gaussian() * sigma;
        for (double& v : vals) {
            v = fp16_to_double(double_to_fp16(rng.gaussian() * sigma + shift));
        }
        const Quantized2x q = quantize_group64(vals);
        const Unpacked2x u = unpack_block2x(pack_block2x(q));

        // Wide-precision oracle for the bound: s/2 plus the fp16 rounding
        // error of the reconstruction grid point.
        const long double s = fp16_to_double(q.scale_bits);
        const long double z = fp16_to_double(q.zero_bits);
        for (size_t i = 0; i < kGroupSize2x; ++i) {
            const long double exact = s * u.raw.q[i] + z;
            const long double round_err =
                std::fabs(static_cast<long double>(fp16_to_double(u.values[i])) - exact);
            const long double bound =
                (std::abs(u.raw.q[i]) == 63)
                    ? std::numeric_limits<long double>::infinity() // clamped tail
                    : s / 2 + round_err + 1e-18L;
            const long double err =
                std::fabs(static_cast<long double>(fp16_to_double(u.values[i])) - vals[i]);
            if (std::abs(u.raw.q[i]) < 63) {
                CHECK(static_cast<double>(err) <= static_cast<double>(bound));
            }
            (void)bound;
        }
    }
}

TEST_CASE("grid-exact inputs reconstruct exactly") {
    Rng rng(9);
    for (int trial = 0; trial < 200; ++trial) {
        const uint16_t sbits = double_to_fp16(std::exp(rng.uniform(-4.0, 0.0)) / 64.0);
        const uint16_t zbits = double_to_fp16(rng.gaussian() * 0.1);
        const double s = fp16_to_double(sbits);
        const double z = fp16_to_double(zbits);
        std::array<double, kGroupSize2x> vals{};
        bool exact_grid = true;
        for (size_t i = 0; i < kGroupSize2x; ++i) {
            const int k = static_cast<int>(rng.index(127)) - 63;
            const double v = s * k + z;
            vals[i] = fp16_to_double(double_to_fp16(v));
            if (vals[i] != v) exact_grid = false; // fp16 rounding broke exactness
        }
        if (!exact_grid) continue;
        const Quantized2x q = quantize_group64(vals);
        const Unpacked2x u = unpack_block2x(pack_block2x(q));
        for (size_t i = 0; i < kGroupSize2x; ++i) {
            CHECK(fp16_to_double(u.values[i]) == vals[i]);
        }
    }
}

TEST_CASE("non-finite input is rejected") {
    std::array<double, kGroupSize2x> vals{};
    vals[3] = NAN;
    CHECK_THROWS_AS(quantize_group64(vals), Error);
}
