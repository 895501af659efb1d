#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "codec4x.hpp"

namespace ecco {

inline constexpr unsigned kLeafCount = 64;   // one per 8-bit segment
inline constexpr unsigned kLeafOffsets = 8;  // speculative start offsets
inline constexpr unsigned kMergeStages = 6;  // log2(64)
inline constexpr unsigned kLeafWindowBits = 15; // 8-bit segment + 7-bit overlap

// Decode result for one speculative start offset inside one segment. Code
// lengths in [2, 8] bound the symbol count to [1, 4].
struct LeafOffsetResult {
    std::array<uint8_t, 4> symbols{};
    std::array<uint8_t, 4> rel_ends{}; // end bit of each code, relative to the segment base
    uint8_t count = 0;
    uint8_t eop = 0;       // start offset of the next code within the following segment
    uint8_t bits_used = 0; // total code bits consumed
};

struct LeafResult {
    std::array<LeafOffsetResult, kLeafOffsets> offsets;
};

// Decodes one 15-bit window (segment plus overlap) at all 8 start offsets.
// The window is passed little endian: bit i of `window` is stream bit
// segment_base + i. Completeness of the codebook guarantees progress.
LeafResult leaf_decode(uint16_t window, const LookaheadTable& table);

struct MergeEntry {
    std::vector<uint8_t> symbols;
    std::vector<uint16_t> ends; // absolute end bit of each symbol within the block
    uint8_t eop = 0;
    uint32_t bits = 0;
};

struct MergeNode {
    size_t first_segment = 0;
    size_t segment_count = 0;
    std::array<MergeEntry, kLeafOffsets> entries;
};

// Stitches two adjacent aligned nodes: the left entry's end-of-parse pointer
// selects which right entry continues it.
MergeNode merge_pair(const MergeNode& left, const MergeNode& right);

struct NodeSummary {
    size_t first_segment = 0;
    size_t segment_count = 0;
    std::array<uint8_t, kLeafOffsets> symbol_count{};
    std::array<uint8_t, kLeafOffsets> eop{};
};

struct DecodeTrace {
    std::vector<LeafResult> leaves;                 // 64 entries
    std::vector<std::vector<NodeSummary>> stages;   // 6 stages: 32, 16, ..., 1 nodes
    bool keep_full_nodes = false;                   // test hook
    std::vector<std::vector<MergeNode>> full_stages;
    uint32_t outlier_mask = 0;
    uint32_t selected_symbols = 0;
};

// Functional model of the hardware decompressor: 64 speculative leaf decoders,
// a 6-stage merge tree, outlier mask derivation and the data mapper. Bit-exact
// with decode_block_reference on every block the encoder can produce.
std::array<uint16_t, kGroupSize4x> parallel_decode(const Block& block,
                                                   const TensorMeta& meta,
                                                   DecodeTrace* trace = nullptr);

struct OutlierOverride {
    uint8_t position = 0;
    uint8_t fp8_value = 0;
};

// Final mapping stage shared by nothing: deliberately reimplements the same
// contract as the reference decoder so the equivalence suite compares two
// independent paths. Symbol 15 maps to the signed group scale, others to
// centroid times its magnitude, positions past the symbol list to zero, then
// outlier overrides apply last-wins.
std::array<uint16_t, kGroupSize4x> map_values(const std::vector<uint8_t>& symbols,
                                              const KMeansPattern& pattern,
                                              uint8_t scale_code,
                                              PowerOfTwoScale tensor_scale,
                                              const std::vector<OutlierOverride>& outliers);

} // namespace ecco
