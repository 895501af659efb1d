#pragma once

#include <cmath>
#include <cstdint>

#include "error.hpp"

namespace ecco {

// 8-bit floating point, E4M3 layout (1 sign, 4 exponent, 3 mantissa bits),
// finite-only flavor: exponent 15 / mantissa 7 encodes NaN, there is no
// infinity, and the largest finite magnitude is 448.

inline constexpr double kFp8Max = 448.0;

enum class Fp8Rounding {
    nearest_even,
    toward_zero,
    away_from_zero,
};

inline bool fp8_is_nan(uint8_t code) {
    return (code & 0x7F) == 0x7F;
}

uint8_t fp8_quantize(double x, Fp8Rounding mode);
double fp8_dequantize(uint8_t code);

// Decode that never throws: NaN codes map to 0.0. Used by block decoders,
// which must stay total on arbitrary in-range tail bytes.
inline double fp8_dequantize_total(uint8_t code) {
    return fp8_is_nan(code) ? 0.0 : fp8_dequantize(code);
}

// Per-tensor scale restricted to powers of two so that descaling is a pure
// exponent adjustment.
struct PowerOfTwoScale {
    int exponent = 0;

    double value() const { return std::ldexp(1.0, exponent); }
};

// Smallest power of two s such that absmax / s <= 448.
PowerOfTwoScale tensor_scale_for(double global_absmax);

} // namespace ecco
