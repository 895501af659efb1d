#pragma once

#include <cmath>
#include <cstdint>

namespace ecco {

// IEEE 754 binary16 values stored as raw bit patterns. Decoding is exact;
// encoding rounds to nearest, ties to even.

inline double fp16_to_double(uint16_t bits) {
    const int sign = bits >> 15;
    const int exponent = (bits >> 10) & 0x1F;
    const int mantissa = bits & 0x3FF;
    double v;
    if (exponent == 0) {
        v = std::ldexp(static_cast<double>(mantissa), -24);
    } else if (exponent == 31) {
        v = mantissa == 0 ? INFINITY : NAN;
    } else {
        v = std::ldexp(static_cast<double>(1024 + mantissa), exponent - 25);
    }
    return sign ? -v : v;
}

inline uint32_t round_half_even_u32(double m) {
    const double f = std::floor(m);
    const double frac = m - f;
    auto u = static_cast<uint32_t>(f);
    if (frac > 0.5) return u + 1;
    if (frac < 0.5) return u;
    return (u % 2 == 0) ? u : u + 1;
}

inline uint16_t double_to_fp16(double v) {
    if (std::isnan(v)) return 0x7E00;
    const uint16_t sign = std::signbit(v) ? 0x8000 : 0;
    const double a = std::fabs(v);
    if (a == 0.0) return sign;
    // 65520 is the midpoint between the largest finite half (65504) and 2^16;
    // nearest-even sends it and everything above to infinity.
    if (a >= 65520.0) return sign | 0x7C00;
    int e = std::ilogb(a);
    if (e >= -14) {
        uint32_t m = round_half_even_u32(std::ldexp(a, 10 - e)); // [1024, 2048)
        if (m == 2048) {
            e += 1;
            m = 1024;
        }
        if (e > 15) return sign | 0x7C00;
        return static_cast<uint16_t>(sign | ((e + 15) << 10) | (m - 1024));
    }
    // Subnormal range: units of 2^-24. A carry into 1024 lands on the
    // smallest normal encoding naturally.
    const uint32_t m = round_half_even_u32(std::ldexp(a, 24));
    return static_cast<uint16_t>(sign | m);
}

inline bool fp16_is_finite(uint16_t bits) {
    return ((bits >> 10) & 0x1F) != 31;
}

} // namespace ecco
