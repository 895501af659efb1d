#include <doctest.h>

#include <cmath>

#include "fp16.hpp"

using namespace ecco;

TEST_CASE("fp16 decode of known patterns") {
    CHECK(fp16_to_double(0x0000) == 0.0);
    CHECK(fp16_to_double(0x3C00) == 1.0);
    CHECK(fp16_to_double(0xBC00) == -1.0);
    CHECK(fp16_to_double(0x3800) == 0.5);
    CHECK(fp16_to_double(0x7BFF) == 65504.0);
    CHECK(fp16_to_double(0x0001) == std::ldexp(1.0, -24)); // smallest subnormal
    CHECK(fp16_to_double(0x0400) == std::ldexp(1.0, -14)); // smallest normal
    CHECK(std::isinf(fp16_to_double(0x7C00)));
    CHECK(std::isnan(fp16_to_double(0x7E00)));
}

TEST_CASE("fp16 round trip is exact for every finite pattern") {
    for (uint32_t bits = 0; bits < 0x10000; ++bits) {
        const auto b = static_cast<uint16_t>(bits);
        if (!fp16_is_finite(b)) continue;
        const double v = fp16_to_double(b);
        const uint16_t back = double_to_fp16(v);
        // +0/-0 keep their sign bit, so even those match exactly.
        CHECK(back == b);
    }
}

TEST_CASE("fp16 encode rounds to nearest even") {
    // 1.0 + 2^-11 is exactly halfway between 1.0 and the next half; ties to even.
    CHECK(double_to_fp16(1.0 + std::ldexp(1.0, -11)) == 0x3C00);
    // Slightly above the halfway point rounds up.
    CHECK(double_to_fp16(1.0 + std::ldexp(1.0, -11) + std::ldexp(1.0, -30)) == 0x3C01);
    // Halfway between 0x3C01 and 0x3C02 goes to the even code.
    CHECK(double_to_fp16(1.0 + 3 * std::ldexp(1.0, -11)) == 0x3C02);
    // Overflow threshold: 65520 is equidistant between 65504 and 2^16.
    CHECK(double_to_fp16(65519.999) == 0x7BFF);
    CHECK(double_to_fp16(65520.0) == 0x7C00);
    CHECK(double_to_fp16(-65520.0) == 0xFC00);
}
