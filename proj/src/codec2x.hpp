#pragma once

#include <array>
#include <cstdint>

#include "tensor.hpp"

namespace ecco {

// 2x activation codec: 64 values to 64 bytes. Byte k holds the signed 7-bit
// quantized value in bits 0..6 and one metadata bit in bit 7. Metadata bits
// 0..15 carry the fp16 scale (LSB first), 16..31 the fp16 zero point,
// 32..63 are reserved zeros.
struct Quantized2x {
    uint16_t scale_bits = 0;
    uint16_t zero_bits = 0;
    std::array<int8_t, kGroupSize2x> q{}; // each in [-63, 63]
};

// Uniform quantization with midpoint zero: z = (max+min)/2, s = (max-min)/126,
// both rounded to fp16; q = clamp(round-half-even((v - z) / s), -63, 63).
Quantized2x quantize_group64(const std::array<double, kGroupSize2x>& values);

Block pack_block2x(const Quantized2x& qz);

struct Unpacked2x {
    std::array<uint16_t, kGroupSize2x> values{};
    Quantized2x raw;
    bool reserved_bits_set = false; // warning, not an error
};

Unpacked2x unpack_block2x(const Block& block);

// Reconstruction of one quantized element, shared by both directions:
// fp16(s * q + z).
uint16_t reconstruct2x(uint16_t scale_bits, uint16_t zero_bits, int q);

} // namespace ecco
