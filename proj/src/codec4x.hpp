#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "calibration.hpp"
#include "tensor.hpp"

namespace ecco {

inline constexpr unsigned kScaleFieldOffset = 504; // group scale FP8 in bits [504, 512)
inline constexpr unsigned kOutlierSlotBits = 15;   // 7-bit position + 8-bit FP8 value

// Fixed tail geometry for one metadata configuration. The coded symbol stream
// grows upward from bit 0; scale, codebook id and pattern id are anchored to
// bit 511 so the final merge selection is always offset 0 of segment 0.
// Outlier slots descend from tail_base.
struct BlockLayout {
    unsigned codebook_bits = 0;   // ceil(log2 H)
    unsigned codebook_offset = 0; // kScaleFieldOffset - codebook_bits
    unsigned pattern_bits = 0;    // fixed-width coding only
    unsigned fixed_tail_base = 0; // codebook_offset - pattern_bits
};

BlockLayout layout_for(const TensorMeta& meta);

struct TailFields {
    uint8_t scale_code = 0;
    uint32_t pattern = 0;
    uint32_t codebook = 0;
    unsigned tail_base = 0; // first bit above the outlier slot region
};

// Reads and validates the tail; throws "corrupt block" on out-of-range ids.
TailFields read_tail(const Block& block, const TensorMeta& meta);

struct EncodeStats {
    uint32_t pattern = 0;
    uint32_t codebook = 0;
    uint32_t coded_bits = 0; // stored symbol stream length (post-clip)
    uint32_t clipped = 0;    // elements dropped from the stream tail
    uint32_t padded = 0;     // outlier slots written
    std::array<uint32_t, 16> histogram{}; // pre-clip symbol counts
};

// One 128-value group to one 512-bit block: normalize, select a pattern
// (MSE search in weight mode, min/max in kv mode), race the H codebooks and
// keep the shortest stream, then clip or pad outliers to fill the block.
Block encode_block(const std::array<double, kGroupSize4x>& values,
                   const TensorMeta& meta, EncodeStats* stats = nullptr);

// Sequential decoder; the correctness oracle for the parallel model.
std::array<uint16_t, kGroupSize4x> decode_block_reference(const Block& block,
                                                          const TensorMeta& meta);

struct RoundtripReport {
    std::vector<double> group_mse;  // zero pads excluded
    double mean_mse = 0.0;          // over all real elements
    std::vector<EncodeStats> stats; // per group
};

enum class DecoderKind {
    reference,
    parallel,
};

RoundtripReport roundtrip_mse(const TensorF16& tensor, const TensorMeta& meta,
                              DecoderKind decoder = DecoderKind::reference);

} // namespace ecco
