#include "fp8.hpp"

#include "fp16.hpp"

namespace ecco {

namespace {

uint32_t round_mantissa(double m, Fp8Rounding mode) {
    switch (mode) {
    case Fp8Rounding::nearest_even:
        return round_half_even_u32(m);
    case Fp8Rounding::toward_zero:
        return static_cast<uint32_t>(std::floor(m));
    case Fp8Rounding::away_from_zero:
        return static_cast<uint32_t>(std::ceil(m));
    }
    raise(ErrorCode::invalid_argument, "unknown FP8 rounding mode");
}

} // namespace

uint8_t fp8_quantize(double x, Fp8Rounding mode) {
    if (!std::isfinite(x)) {
        raise(ErrorCode::invalid_argument, "non-finite input");
    }
    const uint8_t sign = std::signbit(x) ? 0x80 : 0x00;
    const double a = std::fabs(x);
    if (a == 0.0) return sign;
    if (a > kFp8Max) {
        raise(ErrorCode::overflow, "FP8 overflow");
    }
    int e = std::ilogb(a);
    if (e < -6) e = -6;
    // Normals scale to [8, 16) units of 2^(e-3); the subnormal band (e = -6)
    // scales to (0, 8) units of 2^-9.
    uint32_t m = round_mantissa(std::ldexp(a, 3 - e), mode);
    if (m == 16) {
        e += 1;
        m = 8;
    }
    if (e > 8 || (e == 8 && m > 14)) {
        raise(ErrorCode::overflow, "FP8 overflow");
    }
    if (m >= 8) {
        return static_cast<uint8_t>(sign | ((e + 7) << 3) | (m - 8));
    }
    return static_cast<uint8_t>(sign | m);
}

double fp8_dequantize(uint8_t code) {
    if (fp8_is_nan(code)) {
        raise(ErrorCode::invalid_argument, "invalid FP8 code");
    }
    const int exponent = (code >> 3) & 0xF;
    const int mantissa = code & 0x7;
    const double v = exponent ? std::ldexp(static_cast<double>(8 + mantissa), exponent - 10)
                              : std::ldexp(static_cast<double>(mantissa), -9);
    return (code & 0x80) ? -v : v;
}

PowerOfTwoScale tensor_scale_for(double global_absmax) {
    if (!std::isfinite(global_absmax) || global_absmax <= 0.0) {
        raise(ErrorCode::invalid_argument, "tensor absmax must be positive and finite");
    }
    int e = std::ilogb(global_absmax) - 8;
    while (global_absmax <= kFp8Max * std::ldexp(1.0, e - 1)) --e;
    while (global_absmax > kFp8Max * std::ldexp(1.0, e)) ++e;
    return PowerOfTwoScale{e};
}

} // namespace ecco
