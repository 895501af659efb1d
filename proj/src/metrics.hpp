#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "codec4x.hpp"
#include "tensor.hpp"

namespace ecco {

struct SymbolHistogram {
    std::array<uint64_t, 16> counts{};

    uint64_t total() const {
        uint64_t t = 0;
        for (uint64_t c : counts) t += c;
        return t;
    }
};

// Shannon entropy in bits over the nonzero bins.
double entropy_bits(const SymbolHistogram& hist);

// eta = H / b_real; b_real is 4 bits/element for the 4x codec and 8 for 2x.
double bit_efficiency(double entropy, double bits_per_element);

struct ClipPadRatios {
    double clip_ratio = 0.0;
    double pad_ratio = 0.0;
};

ClipPadRatios clip_pad_report(const std::vector<EncodeStats>& stats);

struct RtnResult {
    std::array<uint16_t, kGroupSize4x> values{};
    std::array<uint8_t, kGroupSize4x> symbols{};
};

// Round-to-nearest uniform baseline: asymmetric quantization to 2^bits levels
// with per-group fp16 scale and zero point. The comparison oracle for the 4x
// codec's quality criteria.
RtnResult rtn_baseline(const std::array<double, kGroupSize4x>& values, int bits = 4);

// Element-wise MSE between equal-shape tensors.
double tensor_mse(const TensorF16& a, const TensorF16& b);

} // namespace ecco
