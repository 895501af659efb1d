#include "metrics.hpp"

#include <algorithm>
#include <cmath>

#include "fp16.hpp"

namespace ecco {

double entropy_bits(const SymbolHistogram& hist) {
    const uint64_t total = hist.total();
    if (total == 0) {
        raise(ErrorCode::invalid_argument, "empty histogram");
    }
    double h = 0.0;
    for (uint64_t c : hist.counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(total);
        h -= p * std::log2(p);
    }
    return h;
}

double bit_efficiency(double entropy, double bits_per_element) {
    if (!(bits_per_element > 0.0)) {
        raise(ErrorCode::invalid_argument, "bits per element must be positive");
    }
    return entropy / bits_per_element;
}

ClipPadRatios clip_pad_report(const std::vector<EncodeStats>& stats) {
    if (stats.empty()) {
        raise(ErrorCode::invalid_argument, "empty encode log");
    }
    uint64_t clipped = 0;
    uint64_t padded = 0;
    for (const EncodeStats& s : stats) {
        clipped += s.clipped;
        padded += s.padded;
    }
    const double denom = static_cast<double>(stats.size()) * kGroupSize4x;
    return ClipPadRatios{clipped / denom, padded / denom};
}

RtnResult rtn_baseline(const std::array<double, kGroupSize4x>& values, int bits) {
    double lo = values[0];
    double hi = values[0];
    for (double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const int levels = (1 << bits) - 1;
    uint16_t zero_bits = double_to_fp16(lo);
    uint16_t scale_bits = double_to_fp16((hi - lo) / levels);
    if ((scale_bits & 0x7FFF) == 0) {
        scale_bits = 0x0001;
    }
    const double s = fp16_to_double(scale_bits);
    const double z = fp16_to_double(zero_bits);
    RtnResult out;
    for (size_t i = 0; i < values.size(); ++i) {
        double q = std::floor((values[i] - z) / s + 0.5);
        q = std::clamp(q, 0.0, static_cast<double>(levels));
        out.symbols[i] = static_cast<uint8_t>(q);
        out.values[i] = double_to_fp16(s * q + z);
    }
    return out;
}

double tensor_mse(const TensorF16& a, const TensorF16& b) {
    if (a.rows != b.rows || a.cols != b.cols) {
        raise(ErrorCode::invalid_argument, "tensor shape mismatch");
    }
    if (a.values.empty()) {
        raise(ErrorCode::invalid_argument, "empty tensor");
    }
    double sse = 0.0;
    for (size_t i = 0; i < a.values.size(); ++i) {
        const double d = fp16_to_double(a.values[i]) - fp16_to_double(b.values[i]);
        sse += d * d;
    }
    return sse / static_cast<double>(a.values.size());
}

} // namespace ecco
