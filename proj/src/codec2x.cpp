#include "codec2x.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"
#include "fp16.hpp"

namespace ecco {

namespace {

constexpr uint16_t kSmallestPositiveFp16 = 0x0001; // 2^-24

int round_half_even_int(double x) {
    const double f = std::floor(x);
    const double frac = x - f;
    const auto i = static_cast<long long>(f);
    if (frac > 0.5) return static_cast<int>(i + 1);
    if (frac < 0.5) return static_cast<int>(i);
    return static_cast<int>((i % 2 == 0) ? i : i + 1);
}

} // namespace

uint16_t reconstruct2x(uint16_t scale_bits, uint16_t zero_bits, int q) {
    const double s = fp16_to_double(scale_bits);
    const double z = fp16_to_double(zero_bits);
    return double_to_fp16(s * static_cast<double>(q) + z);
}

Quantized2x quantize_group64(const std::array<double, kGroupSize2x>& values) {
    double lo = values[0];
    double hi = values[0];
    for (double v : values) {
        if (!std::isfinite(v)) {
            raise(ErrorCode::invalid_argument, "non-finite input");
        }
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    Quantized2x out;
    out.zero_bits = double_to_fp16((hi + lo) / 2.0);
    out.scale_bits = double_to_fp16((hi - lo) / 126.0);
    if ((out.scale_bits & 0x7FFF) == 0) {
        out.scale_bits = kSmallestPositiveFp16; // constant group, or underflow
    }
    const double s = fp16_to_double(out.scale_bits);
    const double z = fp16_to_double(out.zero_bits);
    for (size_t i = 0; i < values.size(); ++i) {
        const int q = round_half_even_int((values[i] - z) / s);
        out.q[i] = static_cast<int8_t>(std::clamp(q, -63, 63));
    }
    return out;
}

Block pack_block2x(const Quantized2x& qz) {
    Block block{};
    for (size_t k = 0; k < kGroupSize2x; ++k) {
        uint8_t meta_bit = 0;
        if (k < 16) {
            meta_bit = static_cast<uint8_t>((qz.scale_bits >> k) & 1u);
        } else if (k < 32) {
            meta_bit = static_cast<uint8_t>((qz.zero_bits >> (k - 16)) & 1u);
        }
        block[k] = static_cast<uint8_t>((static_cast<uint8_t>(qz.q[k]) & 0x7F) |
                                        (meta_bit << 7));
    }
    return block;
}

Unpacked2x unpack_block2x(const Block& block) {
    Unpacked2x out;
    uint16_t scale = 0;
    uint16_t zero = 0;
    for (size_t k = 0; k < kGroupSize2x; ++k) {
        const uint8_t meta_bit = block[k] >> 7;
        if (k < 16) {
            scale |= static_cast<uint16_t>(meta_bit) << k;
        } else if (k < 32) {
            zero |= static_cast<uint16_t>(meta_bit) << (k - 16);
        } else if (meta_bit) {
            out.reserved_bits_set = true;
        }
    }
    out.raw.scale_bits = scale;
    out.raw.zero_bits = zero;
    for (size_t k = 0; k < kGroupSize2x; ++k) {
        // Two-step decode: sign-extend the 7-bit field, then affine map.
        const auto q = static_cast<int8_t>(static_cast<uint8_t>(block[k] << 1)) >> 1;
        out.raw.q[k] = static_cast<int8_t>(q);
        out.values[k] = reconstruct2x(scale, zero, q);
    }
    return out;
}

} // namespace ecco
